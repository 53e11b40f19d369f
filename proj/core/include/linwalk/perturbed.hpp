// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "linwalk/ensemble.hpp"
#include "linwalk/estimate.hpp"
#include "linwalk/path.hpp"

namespace linwalk {

/// The abstract framework runs on "a space acted on by the letters, with a
/// cocycle". Two instances are provided: the projective space with the
/// forward cocycle, and the dual projective space with the reversed-walk
/// cocycle (the negated dual cocycle of the inverse letter, whose action
/// matrix is a plain transpose). The scalar line is the d = 1 case of the
/// primal instance.
struct PrimalSpace {
    using Point = ProjPoint;

    Point stationary(const Ensemble& ensemble, std::int64_t depth, RngStream& rng) const
    {
        return sample_stationary(ensemble, depth, rng);
    }
    Point apply(const GroupElement& g, const Point& x) const { return act(g, x); }
    double increment(const GroupElement& g, const Point& x) const { return cocycle(g, x); }
};

struct DualSpace {
    using Point = DualProjPoint;

    Point stationary(const Ensemble& ensemble, std::int64_t depth, RngStream& rng) const
    {
        return sample_stationary_dual(ensemble, depth, rng);
    }
    Point apply(const GroupElement& g, const Point& y) const
    {
        return DualProjPoint(g.mat().transpose() * y.coords());
    }
    double increment(const GroupElement& g, const Point& y) const
    {
        return -std::log((g.mat().transpose() * y.coords()).norm());
    }
};

/// Perturbation sequence (f_n): evaluate(n, future letters, current point).
/// The walk uses f_n composed with the n-fold shift, so `future` starts at
/// the letter just past position n; `horizon` bounds how many of them the
/// evaluation reads. The RNG argument serves projected perturbations that
/// average over resampled tails; deterministic perturbations ignore it.
template <typename Space>
struct Perturbation {
    using Point = typename Space::Point;

    std::int64_t horizon = 0;
    std::string tag = "zero";
    std::function<double(std::int64_t, std::span<const GroupElement>, const Point&, RngStream&)> eval;

    double operator()(std::int64_t n, std::span<const GroupElement> future, const Point& x,
                      RngStream& rng) const
    {
        return eval ? eval(n, future, x, rng) : 0.0;
    }

    static Perturbation zero()
    {
        Perturbation f;
        f.horizon = 0;
        f.tag = "zero";
        return f;
    }
};

/// The ideal boundary perturbation delta(xi_hat, y) on the dual space,
/// with xi_hat the depth-truncated boundary point of the future letters.
Perturbation<DualSpace> ideal_delta_perturbation(std::int64_t depth, const ProjPoint& x0);

/// The finite-range family: f_n = delta(g_1 ... g_{m-n} x_ref, y) for
/// n <= m, constant delta(x_ref, y) beyond.
Perturbation<DualSpace> finite_range_delta_perturbation(std::int64_t m, const ProjPoint& x_ref);

/// Bounded non-negative trajectory weight theta(omega), reading `lookahead`
/// letters from position one.
struct TwistFunction {
    std::int64_t lookahead = 0;
    double sup_bound = 1.0;
    std::string tag = "one";
    std::function<double(std::span<const GroupElement>)> eval;

    double operator()(std::span<const GroupElement> letters) const
    {
        return eval ? eval(letters) : 1.0;
    }

    static TwistFunction one()
    {
        return TwistFunction{};
    }
};

/// theta(omega) = phi(boundary point of the first `depth` letters).
TwistFunction boundary_twist(std::int64_t depth, const ProjPoint& x0,
                             std::function<double(const ProjPoint&)> phi, double sup_bound);

struct UEstimate {
    WeightedEstimate estimate;
    std::int64_t rejected = 0; // infinite-perturbation resamples
};

template <typename Space>
struct UOptions {
    std::optional<typename Space::Point> fixed_start; // default: stationary draw
    std::int64_t stationary_depth = kDefaultStationaryDepth;
    unsigned workers = 1;
    /// When set, the killed sum runs to n + extra_sum_steps and the
    /// perturbation terms are left out of the summand (the exact form the
    /// chain disintegration identity equates).
    std::int64_t extra_sum_steps = 0;
    bool bare_sum = false;
};

namespace detail {

template <typename Space>
struct UPathStats {
    double tilde_s = 0.0;    // perturbed sum at the horizon (or bare sum)
    double threshold = 0.0;  // max_{k <= n} -(S_k + f_k o T^k - f_0)
    double twist = 1.0;
    bool rejected = false;
};

/// One path of the perturbed walk; fills stats for every horizon in n_list
/// (strictly increasing). Used by the U estimator and the scan.
template <typename Space>
UPathStats<Space> scan_perturbed_path(const Space& space, const Ensemble& ensemble,
                                      const Perturbation<Space>& f, const TwistFunction& theta,
                                      const std::vector<std::int64_t>& n_list,
                                      std::vector<UPathStats<Space>>& per_level,
                                      const typename Space::Point& start, RngStream& rng,
                                      std::int64_t extra_sum_steps, bool bare_sum)
{
    const std::int64_t n_max = n_list.back();
    const std::int64_t total =
        std::max(n_max + extra_sum_steps + f.horizon, theta.lookahead);
    std::vector<GroupElement> letters;
    letters.reserve(static_cast<std::size_t>(total));
    for (std::int64_t i = 0; i < total; ++i) {
        letters.push_back(ensemble.draw(rng));
    }
    const std::span<const GroupElement> all(letters);

    UPathStats<Space> result;
    const double twist = theta(all.first(static_cast<std::size_t>(theta.lookahead)));
    result.twist = twist;

    typename Space::Point x = start;
    const double f0 = f(0, all.subspan(0, static_cast<std::size_t>(f.horizon)), x, rng);
    if (!std::isfinite(f0)) {
        result.rejected = true;
        return result;
    }
    double sum = 0.0;
    double threshold = -std::numeric_limits<double>::infinity();
    std::size_t level = 0;
    for (std::int64_t k = 1; k <= n_max + extra_sum_steps; ++k) {
        const GroupElement& g = letters[static_cast<std::size_t>(k - 1)];
        sum += space.increment(g, x);
        x = space.apply(g, x);
        if (k <= n_max) {
            const double fk =
                f(k, all.subspan(static_cast<std::size_t>(k), static_cast<std::size_t>(f.horizon)), x, rng);
            if (!std::isfinite(fk)) {
                result.rejected = true;
                return result;
            }
            const double tilde = sum + fk - f0;
            threshold = std::max(threshold, -tilde);
            while (level < n_list.size() && n_list[level] == k) {
                UPathStats<Space>& st = per_level[level];
                st.tilde_s = bare_sum ? 0.0 : tilde; // bare sums filled below
                st.threshold = threshold;
                st.twist = twist;
                ++level;
            }
        }
    }
    if (bare_sum) {
        // The killed sum without perturbation terms runs to n + extra steps;
        // only a single horizon is meaningful in this mode.
        per_level.back().tilde_s = sum;
    }
    result.tilde_s = per_level.back().tilde_s;
    result.threshold = per_level.back().threshold;
    return result;
}

} // namespace detail

/// U_n^{f,theta}(t) = int E( (t + S~_n) theta ; tau^f > n ) nu(dx): the
/// twisted killed expectation of the perturbed walk started from the
/// stationary law (or from a fixed point).
template <typename Space>
UEstimate estimate_U(const Space& space, const Ensemble& ensemble, const Perturbation<Space>& f,
                     const TwistFunction& theta, double t, std::int64_t n, std::int64_t n_paths,
                     std::uint64_t seed, const UOptions<Space>& opts = {})
{
    const std::vector<std::int64_t> n_list{n};
    std::vector<double> values(static_cast<std::size_t>(n_paths));
    std::vector<std::int64_t> rejects(static_cast<std::size_t>(n_paths), 0);
    mc::for_each_sample(n_paths, seed, /*salt=*/0x9001, opts.workers, [&](std::int64_t i, RngStream& rng) {
        for (int attempt = 0;; ++attempt) {
            const typename Space::Point start =
                opts.fixed_start ? *opts.fixed_start
                                 : space.stationary(ensemble, opts.stationary_depth, rng);
            std::vector<detail::UPathStats<Space>> per_level(1);
            const auto st = detail::scan_perturbed_path(space, ensemble, f, theta, n_list, per_level,
                                                        start, rng, opts.extra_sum_steps, opts.bare_sum);
            if (!st.rejected) {
                const auto& lv = per_level[0];
                values[static_cast<std::size_t>(i)] =
                    t >= lv.threshold ? (t + lv.tilde_s) * lv.twist : 0.0;
                return;
            }
            rejects[static_cast<std::size_t>(i)]++;
            if (attempt >= 256) {
                throw_error(ErrorKind::InfinitePerturbation, "persistent infinite perturbation values");
            }
        }
    });
    const MeanStderr ms = mean_stderr(values);
    UEstimate out;
    out.estimate = {ms.mean, ms.stderr_, n_paths, seed};
    for (std::int64_t r : rejects) {
        out.rejected += r;
    }
    return out;
}

/// E(f_n | A_p) realized by inner Monte Carlo: letters beyond position p are
/// resampled `tail_draws` times and the evaluations averaged. Returns f
/// itself when it already reads at most p letters.
template <typename Space>
Perturbation<Space> project_finite_size(const Perturbation<Space>& f, std::int64_t p,
                                        std::int64_t tail_draws, const Ensemble& ensemble)
{
    if (tail_draws < 1) {
        throw_error(ErrorKind::ConfigError, "tail_draws must be >= 1");
    }
    if (f.horizon <= p) {
        Perturbation<Space> same = f;
        same.tag = f.tag + "|proj(noop)";
        return same;
    }
    Perturbation<Space> proj;
    proj.horizon = f.horizon;
    proj.tag = f.tag + "|proj(p=" + std::to_string(p) + ")";
    proj.eval = [f, p, tail_draws, &ensemble](std::int64_t n, std::span<const GroupElement> future,
                                              const typename Space::Point& x, RngStream& rng) {
        std::vector<GroupElement> letters(future.begin(), future.end());
        KahanSum acc;
        for (std::int64_t d = 0; d < tail_draws; ++d) {
            for (std::size_t j = static_cast<std::size_t>(p); j < letters.size(); ++j) {
                letters[j] = ensemble.draw(rng);
            }
            const double v = f(n, letters, x, rng);
            if (!std::isfinite(v)) {
                return v;
            }
            acc.add(v);
        }
        return acc.value() / static_cast<double>(tail_draws);
    };
    return proj;
}

struct ApproximationRow {
    std::int64_t p = 0;
    double d_hat = 0.0; // mean of exp(alpha |f - f_p|) - 1
    double stderr_ = 0.0;
};

struct ApproximationProfile {
    std::vector<ApproximationRow> rows;
    double alpha_used = 0.0;     // after adaptive halving
    double c_alpha = 0.0;        // empirical exponential moment of f
    double decay_rate = 0.0;     // fitted slope of log d_hat against p
    double decay_rate_stderr = 0.0;
};

/// Empirical finite-size approximation profile of a perturbation: for each
/// p, the exponential moment of |f - E(f | A_p)| at n = 0, started from the
/// stationary law. Halves alpha until the moment is finite; throws
/// MomentOverflow at the floor.
template <typename Space>
ApproximationProfile approximation_profile(const Space& space, const Ensemble& ensemble,
                                           const Perturbation<Space>& f, double alpha,
                                           const std::vector<std::int64_t>& p_list,
                                           std::int64_t n_samples, std::int64_t tail_draws,
                                           std::uint64_t seed,
                                           std::int64_t stationary_depth = kDefaultStationaryDepth,
                                           unsigned workers = 1)
{
    const std::size_t levels = p_list.size();
    std::vector<double> f_vals(static_cast<std::size_t>(n_samples));
    std::vector<double> gaps(static_cast<std::size_t>(n_samples) * levels);
    std::vector<Perturbation<Space>> projections;
    projections.reserve(levels);
    for (std::int64_t p : p_list) {
        projections.push_back(project_finite_size(f, p, tail_draws, ensemble));
    }
    mc::for_each_sample(n_samples, seed, /*salt=*/0x9002, workers, [&](std::int64_t i, RngStream& rng) {
        const typename Space::Point x = space.stationary(ensemble, stationary_depth, rng);
        std::vector<GroupElement> letters;
        letters.reserve(static_cast<std::size_t>(f.horizon));
        for (std::int64_t k = 0; k < f.horizon; ++k) {
            letters.push_back(ensemble.draw(rng));
        }
        RngStream tail_rng = rng.fork(0xB0);
        const double fv = f(0, letters, x, tail_rng);
        f_vals[static_cast<std::size_t>(i)] = fv;
        for (std::size_t l = 0; l < levels; ++l) {
            const double fp = projections[l](0, letters, x, tail_rng);
            gaps[static_cast<std::size_t>(i) * levels + l] = std::abs(fv - fp);
        }
    });

    ApproximationProfile profile;
    double a = alpha;
    for (;;) {
        bool finite = true;
        std::vector<double> moment(static_cast<std::size_t>(n_samples));
        profile.rows.clear();
        for (std::size_t l = 0; l < levels && finite; ++l) {
            for (std::int64_t i = 0; i < n_samples; ++i) {
                moment[static_cast<std::size_t>(i)] =
                    std::expm1(a * gaps[static_cast<std::size_t>(i) * levels + l]);
                if (!std::isfinite(moment[static_cast<std::size_t>(i)])) {
                    finite = false;
                    break;
                }
            }
            if (finite) {
                const MeanStderr ms = mean_stderr(moment);
                profile.rows.push_back({p_list[l], ms.mean, ms.stderr_});
            }
        }
        if (finite) {
            KahanSum cexp;
            for (double v : f_vals) {
                const double e = std::exp(a * std::abs(v));
                if (!std::isfinite(e)) {
                    finite = false;
                    break;
                }
                cexp.add(e);
            }
            if (finite) {
                profile.alpha_used = a;
                profile.c_alpha = cexp.value() / static_cast<double>(n_samples);
                break;
            }
        }
        a *= 0.5;
        if (a < alpha * 0x1.0p-20) {
            throw_error(ErrorKind::MomentOverflow, "no finite exponential moment after alpha halving");
        }
    }

    std::vector<double> ps;
    std::vector<double> logd;
    for (const auto& row : profile.rows) {
        if (row.d_hat > 0.0) {
            ps.push_back(static_cast<double>(row.p));
            logd.push_back(std::log(row.d_hat));
        }
    }
    if (ps.size() >= 3) {
        const LinearFit fit = linear_fit(ps, logd);
        profile.decay_rate = fit.slope;
        profile.decay_rate_stderr = fit.slope_stderr;
    }
    return profile;
}

struct TwistRow {
    std::int64_t p = 0;
    double gap = 0.0; // E |theta - theta_p|
    double stderr_ = 0.0;
};

/// Finite-size profile of a twist function: E|theta - E(theta | A_p)|.
std::vector<TwistRow> twist_profile(const Ensemble& ensemble, const TwistFunction& theta,
                                    const std::vector<std::int64_t>& p_list,
                                    std::int64_t n_samples, std::int64_t tail_draws,
                                    std::uint64_t seed, unsigned workers = 1);

/// State of the letters-window Markov chain: p+1 letters, the space point,
/// and the step counter selecting which f_q the perturbation reads.
template <typename Space>
struct ChainState {
    std::vector<GroupElement> letters; // length p + 1
    typename Space::Point point;
    std::int64_t counter = 0;
};

/// One transition: shift the window left, append a fresh draw, act on the
/// point with the new leading letter, bump the counter.
template <typename Space>
ChainState<Space> chain_step(const Space& space, const Ensemble& ensemble,
                             const ChainState<Space>& state, RngStream& rng)
{
    ChainState<Space> next{state.letters, state.point, state.counter + 1};
    for (std::size_t j = 0; j + 1 < next.letters.size(); ++j) {
        next.letters[j] = next.letters[j + 1];
    }
    next.letters.back() = ensemble.draw(rng);
    next.point = space.apply(next.letters.front(), state.point);
    return next;
}

template <typename Space>
std::vector<ChainState<Space>> simulate_chain(const Space& space, const Ensemble& ensemble,
                                              const ChainState<Space>& initial, std::int64_t steps,
                                              RngStream& rng)
{
    std::vector<ChainState<Space>> traj;
    traj.reserve(static_cast<std::size_t>(steps) + 1);
    traj.push_back(initial);
    for (std::int64_t k = 0; k < steps; ++k) {
        traj.push_back(chain_step(space, ensemble, traj.back(), rng));
    }
    return traj;
}

/// The window-measurable perturbation read off a chain state:
/// f_counter(window letters past the leading one, point).
template <typename Space>
double chain_perturbation(const Perturbation<Space>& f, const ChainState<Space>& state,
                          RngStream& rng)
{
    const std::span<const GroupElement> window(state.letters);
    return f(state.counter, window.subspan(1), state.point, rng);
}

template <typename Space>
struct ChainOptions {
    std::optional<ChainState<Space>> fixed_initial;
    std::int64_t stationary_depth = kDefaultStationaryDepth;
    unsigned workers = 1;
};

template <typename Space>
ChainState<Space> draw_initial_state(const Space& space, const Ensemble& ensemble, std::int64_t p,
                                     std::int64_t stationary_depth, RngStream& rng)
{
    ChainState<Space> a{{}, space.stationary(ensemble, stationary_depth, rng), 0};
    a.letters.reserve(static_cast<std::size_t>(p) + 1);
    for (std::int64_t j = 0; j <= p; ++j) {
        a.letters.push_back(ensemble.draw(rng));
    }
    return a;
}

/// W_n(a, t) = E_a( t + sum_{i=1}^{n+p} inc(xi_i) ; tau~^f_t > n ), averaged
/// over the initial law (window letters iid, point stationary) unless a
/// fixed initial state is supplied. Requires f to read at most p letters.
template <typename Space>
WeightedEstimate estimate_W_chain(const Space& space, const Ensemble& ensemble,
                                  const Perturbation<Space>& f, std::int64_t p, double t,
                                  std::int64_t n, std::int64_t n_paths, std::uint64_t seed,
                                  const ChainOptions<Space>& opts = {})
{
    if (f.horizon > p) {
        throw_error(ErrorKind::ConfigError, "chain form requires a window-measurable perturbation");
    }
    if (opts.fixed_initial &&
        static_cast<std::int64_t>(opts.fixed_initial->letters.size()) != p + 1) {
        throw_error(ErrorKind::ConfigError, "initial window must hold p + 1 letters");
    }
    return mc::sample_mean(n_paths, seed, /*salt=*/0x9003, opts.workers, [&](std::int64_t, RngStream& rng) {
        ChainState<Space> state = opts.fixed_initial
                                      ? *opts.fixed_initial
                                      : draw_initial_state(space, ensemble, p, opts.stationary_depth, rng);
        const double f_init = chain_perturbation(f, state, rng);
        double sum = 0.0;
        bool alive = true;
        for (std::int64_t k = 1; k <= n + p; ++k) {
            const typename Space::Point before = state.point;
            state = chain_step(space, ensemble, state, rng);
            sum += space.increment(state.letters.front(), before);
            if (alive && k <= n) {
                const double fk = chain_perturbation(f, state, rng);
                if (t + sum + fk - f_init < 0.0) {
                    alive = false;
                }
            }
        }
        return alive ? t + sum : 0.0;
    });
}

struct DisintegrationCheck {
    WeightedEstimate direct; // E(t + S_{n+p}; tau^f > n) under the walk
    WeightedEstimate chain;  // W_n averaged over the initial law
    double difference = 0.0;
    double combined_stderr = 0.0;
};

/// Checks the disintegration identity tying the killed walk functional to
/// the letters-window chain, as an estimator equality.
template <typename Space>
DisintegrationCheck disintegration_check(const Space& space, const Ensemble& ensemble,
                                         const Perturbation<Space>& f, std::int64_t p, double t,
                                         std::int64_t n, std::int64_t n_paths, std::uint64_t seed,
                                         std::optional<typename Space::Point> fixed_start = {},
                                         std::int64_t stationary_depth = kDefaultStationaryDepth,
                                         unsigned workers = 1)
{
    UOptions<Space> uopts;
    uopts.fixed_start = fixed_start;
    uopts.stationary_depth = stationary_depth;
    uopts.workers = workers;
    uopts.extra_sum_steps = p;
    uopts.bare_sum = true;
    const UEstimate direct = estimate_U(space, ensemble, f, TwistFunction::one(), t, n, n_paths,
                                        seed, uopts);
    ChainOptions<Space> copts;
    copts.stationary_depth = stationary_depth;
    copts.workers = workers;
    if (fixed_start) {
        // Fixed point, random window letters.
        copts.fixed_initial = std::nullopt;
    }
    WeightedEstimate chain;
    if (fixed_start) {
        std::vector<double> values(static_cast<std::size_t>(n_paths));
        mc::for_each_sample(n_paths, seed ^ 0x51D, /*salt=*/0x9004, workers, [&](std::int64_t i, RngStream& rng) {
            ChainState<Space> a{{}, *fixed_start, 0};
            for (std::int64_t j = 0; j <= p; ++j) {
                a.letters.push_back(ensemble.draw(rng));
            }
            ChainOptions<Space> one;
            one.fixed_initial = a;
            values[static_cast<std::size_t>(i)] =
                estimate_W_chain(space, ensemble, f, p, t, n, 1, rng.next_u64(), one).value;
        });
        const MeanStderr ms = mean_stderr(values);
        chain = {ms.mean, ms.stderr_, n_paths, seed};
    } else {
        chain = estimate_W_chain(space, ensemble, f, p, t, n, n_paths, seed ^ 0x51D, copts);
    }
    DisintegrationCheck check{direct.estimate, chain, 0.0, 0.0};
    check.difference = direct.estimate.value - chain.value;
    check.combined_stderr = std::sqrt(direct.estimate.stderr_ * direct.estimate.stderr_ +
                                      chain.stderr_ * chain.stderr_);
    return check;
}

struct MartingaleRow {
    std::int64_t k = 0;
    double mean = 0.0;
    double stderr_ = 0.0;
};

/// Conditional-mean estimates of the chain martingale increments
/// M_k - M_{k-1}; each row should vanish within its error bar.
template <typename Space>
std::vector<MartingaleRow> martingale_residual(const Space& space, const Ensemble& ensemble,
                                               std::int64_t p, std::int64_t k_max,
                                               std::int64_t n_chains, std::uint64_t seed,
                                               std::int64_t stationary_depth = kDefaultStationaryDepth,
                                               unsigned workers = 1)
{
    std::vector<double> incs(static_cast<std::size_t>(n_chains) * static_cast<std::size_t>(k_max));
    mc::for_each_sample(n_chains, seed, /*salt=*/0x9005, workers, [&](std::int64_t i, RngStream& rng) {
        ChainState<Space> state = draw_initial_state(space, ensemble, p, stationary_depth, rng);
        // M_k - M_{k-1} equals the walk increment observed at chain step
        // k + p; warm the window through the first p steps.
        for (std::int64_t k = 1; k <= k_max + p; ++k) {
            const typename Space::Point before = state.point;
            state = chain_step(space, ensemble, state, rng);
            if (k > p) {
                incs[static_cast<std::size_t>(i) * static_cast<std::size_t>(k_max) +
                     static_cast<std::size_t>(k - p - 1)] = space.increment(state.letters.front(), before);
            }
        }
    });
    std::vector<MartingaleRow> rows;
    std::vector<double> col(static_cast<std::size_t>(n_chains));
    for (std::int64_t k = 1; k <= k_max; ++k) {
        for (std::int64_t i = 0; i < n_chains; ++i) {
            col[static_cast<std::size_t>(i)] =
                incs[static_cast<std::size_t>(i) * static_cast<std::size_t>(k_max) +
                     static_cast<std::size_t>(k - 1)];
        }
        const MeanStderr ms = mean_stderr(col);
        rows.push_back({k, ms.mean, ms.stderr_});
    }
    return rows;
}

struct ScanCell {
    std::int64_t n = 0;
    std::int64_t m = 0;
    double t = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double stderr_ = 0.0;
    bool pass = false;
};

struct ScanReport {
    std::vector<ScanCell> zero_shift_cells; // increasing direction, shift = slack = 0
    std::int64_t zero_shift_violations = 0;
    double fitted_A = 0.0;
    double gamma = 0.25;
    double b = 0.25;
    bool fitted_pass = false;
    std::vector<ScanCell> fitted_cells;
};

/// Two-sided quasi-monotonicity scan of U_n^{f,theta} over an (n, m, t)
/// grid on shared paths: flags violations of the zero-shift increasing
/// direction, then fits the smallest A making both shifted inequalities
///   U_n(t) <= U_m(t + A n^-gamma) + A n^-b (1 + max(t,0)) + 3 se
/// (and the converse) hold across the grid. Diagnostic; the fit reports
/// empirical constants, not the non-constructive ones.
template <typename Space>
ScanReport quasi_monotonicity_scan(const Space& space, const Ensemble& ensemble,
                                   const Perturbation<Space>& f, const TwistFunction& theta,
                                   const std::vector<double>& t_grid,
                                   const std::vector<std::int64_t>& n_grid, std::int64_t n_paths,
                                   std::uint64_t seed, double gamma = 0.25, double b = 0.25,
                                   const UOptions<Space>& opts = {})
{
    const std::size_t levels = n_grid.size();
    std::vector<double> tilde(static_cast<std::size_t>(n_paths) * levels);
    std::vector<double> thresh(static_cast<std::size_t>(n_paths) * levels);
    std::vector<double> twist(static_cast<std::size_t>(n_paths));
    mc::for_each_sample(n_paths, seed, /*salt=*/0x9006, opts.workers, [&](std::int64_t i, RngStream& rng) {
        for (int attempt = 0;; ++attempt) {
            const typename Space::Point start =
                opts.fixed_start ? *opts.fixed_start
                                 : space.stationary(ensemble, opts.stationary_depth, rng);
            std::vector<detail::UPathStats<Space>> per_level(levels);
            const auto st = detail::scan_perturbed_path(space, ensemble, f, theta, n_grid, per_level,
                                                        start, rng, 0, false);
            if (!st.rejected) {
                for (std::size_t l = 0; l < levels; ++l) {
                    tilde[static_cast<std::size_t>(i) * levels + l] = per_level[l].tilde_s;
                    thresh[static_cast<std::size_t>(i) * levels + l] = per_level[l].threshold;
                }
                twist[static_cast<std::size_t>(i)] = st.twist;
                return;
            }
            if (attempt >= 256) {
                throw_error(ErrorKind::InfinitePerturbation, "persistent infinite perturbation values");
            }
        }
    });

    auto value_at = [&](std::int64_t path, std::size_t level, double t) {
        const std::size_t idx = static_cast<std::size_t>(path) * levels + level;
        return t >= thresh[idx] ? (t + tilde[idx]) * twist[static_cast<std::size_t>(path)] : 0.0;
    };
    // The error bar comes from the per-path difference (shared paths), while
    // the reported sides are the two estimates the inequality compares.
    auto cell = [&](std::size_t ln, std::size_t lm, double t, double shift, double slack) {
        std::vector<double> diff(static_cast<std::size_t>(n_paths));
        KahanSum lhs_sum;
        for (std::int64_t i = 0; i < n_paths; ++i) {
            const double a = value_at(i, ln, t);
            const double b = value_at(i, lm, t + shift);
            diff[static_cast<std::size_t>(i)] = a - b;
            lhs_sum.add(a);
        }
        const MeanStderr ms = mean_stderr(diff);
        ScanCell c;
        c.n = n_grid[ln];
        c.m = n_grid[lm];
        c.t = t;
        c.lhs = lhs_sum.value() / static_cast<double>(n_paths);
        c.rhs = c.lhs - ms.mean + slack; // U_m(t + shift) + slack
        c.stderr_ = ms.stderr_;
        c.pass = ms.mean <= slack + 3.0 * ms.stderr_;
        return c;
    };

    ScanReport report;
    report.gamma = gamma;
    report.b = b;
    for (double t : t_grid) {
        for (std::size_t ln = 0; ln < levels; ++ln) {
            for (std::size_t lm = ln + 1; lm < levels; ++lm) {
                const ScanCell c = cell(ln, lm, t, 0.0, 0.0);
                report.zero_shift_cells.push_back(c);
                if (!c.pass) {
                    ++report.zero_shift_violations;
                }
            }
        }
    }

    auto all_pass = [&](double A, std::vector<ScanCell>* out) {
        bool ok = true;
        for (double t : t_grid) {
            for (std::size_t ln = 0; ln < levels; ++ln) {
                for (std::size_t lm = ln + 1; lm < levels; ++lm) {
                    const double nd = static_cast<double>(n_grid[ln]);
                    const double shift = A * std::pow(nd, -gamma);
                    const double slack = A * std::pow(nd, -b) * (1.0 + std::max(t, 0.0));
                    const ScanCell up = cell(ln, lm, t, shift, slack);
                    // Converse: U_m(t) <= U_n(t + shift) + slack.
                    const ScanCell down = cell(lm, ln, t, shift, slack);
                    if (out) {
                        out->push_back(up);
                        out->push_back(down);
                    }
                    ok = ok && up.pass && down.pass;
                }
            }
        }
        return ok;
    };

    double hi = 1.0;
    while (!all_pass(hi, nullptr) && hi < 1e6) {
        hi *= 2.0;
    }
    double lo = 0.0;
    if (all_pass(0.0, nullptr)) {
        hi = 0.0;
    }
    for (int iter = 0; iter < 40 && hi - lo > 1e-6 * (1.0 + hi); ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (all_pass(mid, nullptr)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    report.fitted_A = hi;
    report.fitted_pass = all_pass(hi, &report.fitted_cells);
    return report;
}

} // namespace linwalk
