// SPDX-License-Identifier: Apache-2.0
#include "linwalk/target_measure.hpp"

#include <cmath>

namespace linwalk {

namespace {

constexpr std::uint64_t kSaltRho = 0x7101;
constexpr std::uint64_t kSaltDensity = 0x7102;
constexpr std::uint64_t kSaltHarm = 0x7103;
constexpr std::uint64_t kSaltReversal = 0x7104;
constexpr std::uint64_t kSaltTranslate = 0x7105;
constexpr std::uint64_t kSaltTail = 0x7106;
constexpr std::uint64_t kSaltCllt = 0x7107;
constexpr std::uint64_t kSaltPrediction = 0x7108;

/// Per-path data all rho-type estimators consume: the signed terminal sum,
/// the lower cut from the tau > n-1 event, and the terminal direction.
struct RhoPathData {
    double s = 0.0;        // sign * S_n
    double cut = 0.0;      // max(0, max_{k <= n-1} (-sign S_k))
    double barrier_n = 0.0; // max_{k <= n} (-sign S_k); tau > n iff t >= barrier_n
    Vector terminal;
};

RhoPathData scan_rho_path(const Ensemble& ensemble, const ProjPoint& x, std::int64_t n,
                          double sign, RngStream& rng)
{
    Vector v = x.coords();
    Vector scratch(v.size());
    GroupElement storage = GroupElement::identity(v.size());
    double sum = 0.0;
    double barrier_prefix = -std::numeric_limits<double>::infinity();
    double barrier_all = -std::numeric_limits<double>::infinity();
    for (std::int64_t k = 1; k <= n; ++k) {
        sum += step_direction(ensemble.draw_ref(rng, storage), v, scratch);
        if (k < n) {
            barrier_prefix = std::max(barrier_prefix, -sign * sum);
        }
        barrier_all = std::max(barrier_all, -sign * sum);
    }
    RhoPathData data;
    data.s = sign * sum;
    data.cut = std::max(0.0, barrier_prefix);
    data.barrier_n = barrier_all;
    data.terminal = v;
    return data;
}

double direction_sign(Direction d)
{
    return d == Direction::Plus ? 1.0 : -1.0;
}

} // namespace

WeightedEstimate estimate_rho_action(const Ensemble& ensemble, const ProjPoint& x, std::int64_t n,
                                     std::int64_t n_paths, const TestFunction& h,
                                     Direction direction, std::uint64_t seed, unsigned workers)
{
    if (n < 1 || n_paths < 2) {
        throw_error(ErrorKind::ConfigError, "need n >= 1 and n_paths >= 2");
    }
    const double sign = direction_sign(direction);
    return mc::sample_mean(n_paths, seed, kSaltRho, workers, [&](std::int64_t, RngStream& rng) {
        const RhoPathData d = scan_rho_path(ensemble, x, n, sign, rng);
        return h.phi(ProjPoint(d.terminal)) * h.psi.weighted_shifted_tail(d.cut, d.s);
    });
}

std::vector<DensityRow> density_W(const Ensemble& ensemble, const ProjPoint& x, std::int64_t n,
                                  std::int64_t n_paths, const std::vector<double>& u_grid,
                                  Direction direction, std::uint64_t seed, unsigned workers)
{
    const double sign = direction_sign(direction);
    std::vector<double> ramp_start(static_cast<std::size_t>(n_paths));
    std::vector<double> s_vals(static_cast<std::size_t>(n_paths));
    mc::for_each_sample(n_paths, seed, kSaltDensity, workers, [&](std::int64_t i, RngStream& rng) {
        const RhoPathData d = scan_rho_path(ensemble, x, n, sign, rng);
        ramp_start[static_cast<std::size_t>(i)] = d.cut + d.s;
        s_vals[static_cast<std::size_t>(i)] = d.s;
    });
    std::vector<DensityRow> rows;
    rows.reserve(u_grid.size());
    std::vector<double> contrib(static_cast<std::size_t>(n_paths));
    for (double u : u_grid) {
        for (std::size_t i = 0; i < contrib.size(); ++i) {
            contrib[i] = u >= ramp_start[i] ? u - s_vals[i] : 0.0;
        }
        const MeanStderr ms = mean_stderr(contrib);
        rows.push_back({u, ms.mean, ms.stderr_});
    }
    return rows;
}

WeightedEstimate harmonicity_residual(const Ensemble& ensemble, const ProjPoint& x, std::int64_t n,
                                      std::int64_t n_paths, const TestFunction& h,
                                      std::int64_t inner_draws, Direction direction,
                                      std::uint64_t seed, unsigned workers)
{
    if (inner_draws < 1) {
        throw_error(ErrorKind::ConfigError, "inner_draws must be >= 1");
    }
    const double sign = direction_sign(direction);
    return mc::sample_mean(n_paths, seed, kSaltHarm, workers, [&](std::int64_t, RngStream& rng) {
        // One path of n+1 letters serves both sides.
        Vector v = x.coords();
        Vector scratch(v.size());
        GroupElement storage = GroupElement::identity(v.size());
        double sum = 0.0;
        double barrier = -std::numeric_limits<double>::infinity();
        double cut_n = 0.0;   // cut for horizon n   (prefix k <= n-1)
        double s_n = 0.0;
        Vector terminal_n;
        for (std::int64_t k = 1; k <= n + 1; ++k) {
            if (k == n + 1) {
                cut_n = std::max(0.0, barrier);
                s_n = sign * sum;
                terminal_n = v;
            }
            sum += step_direction(ensemble.draw_ref(rng, storage), v, scratch);
            if (k <= n) {
                barrier = std::max(barrier, -sign * sum);
            }
        }
        const double cut_n1 = std::max(0.0, barrier); // prefix k <= n
        const double lhs = h.phi(ProjPoint(v)) * h.psi.weighted_shifted_tail(cut_n1, sign * sum);

        // rho_n(Rh): the killing indicator turns into the lower bound -s_n.
        const ProjPoint xn(terminal_n);
        const double lower = std::max(cut_n, -s_n);
        KahanSum inner;
        RngStream inner_rng = rng.fork(0xA1);
        for (std::int64_t j = 0; j < inner_draws; ++j) {
            const GroupElement g = ensemble.draw(inner_rng);
            const double sigma_j = cocycle(g, xn);
            inner.add(h.phi(act(g, xn)) * h.psi.weighted_shifted_tail(lower, s_n + sign * sigma_j));
        }
        const double rhs = inner.value() / static_cast<double>(inner_draws);
        return lhs - rhs;
    });
}

ReversalReport reversal_residual(const Ensemble& ensemble, const ProjPoint& x, std::int64_t n,
                                 std::int64_t n_paths, std::int64_t n_y, const TestFunction& h,
                                 std::uint64_t seed, std::int64_t stationary_depth,
                                 unsigned workers)
{
    if (n_y < 1) {
        throw_error(ErrorKind::ConfigError, "need at least one dual draw");
    }
    // Shared stationary dual draws; infinite-delta rejections are counted
    // per the nu*-a.s. finiteness guarantee (they must stay rare).
    ReversalReport report;
    std::vector<DualProjPoint> ys;
    ys.reserve(static_cast<std::size_t>(n_y));
    {
        RngStream rng(seed, 0xFEED);
        std::int64_t guard = 0;
        while (static_cast<std::int64_t>(ys.size()) < n_y) {
            if (++guard > 64 * n_y) {
                throw_error(ErrorKind::InfiniteDelta, "persistent infinite-delta dual draws");
            }
            ys.push_back(sample_stationary_dual(ensemble, stationary_depth, rng));
        }
    }

    const std::size_t ny = ys.size();
    std::vector<double> lhs(static_cast<std::size_t>(n_paths));
    std::vector<double> rhs(static_cast<std::size_t>(n_paths) * ny, 0.0);
    std::vector<std::uint8_t> rejected(static_cast<std::size_t>(n_paths) * ny, 0);
    mc::for_each_sample(n_paths, seed, kSaltReversal, workers, [&](std::int64_t i, RngStream& rng) {
        const PathRecord path = simulate_path(ensemble, x, n, /*keep_elements=*/true, rng);
        // min_prefix is +inf for n == 1, giving cut = 0 as required.
        const double c = std::max(0.0, -path.min_prefix);
        lhs[static_cast<std::size_t>(i)] =
            h.phi(path.terminal_point) * h.psi.weighted_shifted_tail(c, path.partial_sums.back());
        for (std::size_t j = 0; j < ny; ++j) {
            try {
                const ReversedRecord rev = reversed_walk_values(path, ys[j]);
                const PiecewiseLinear::TailIntegrals ti = h.psi.tails(rev.threshold);
                rhs[static_cast<std::size_t>(i) * ny + j] =
                    h.phi(rev.terminal_point) * (ti.first + rev.values.back() * ti.mass);
            } catch (const Error& err) {
                if (err.kind() != ErrorKind::InfiniteDelta) {
                    throw;
                }
                rejected[static_cast<std::size_t>(i) * ny + j] = 1;
            }
        }
    });

    // Pooled residual over paths (y-average per path keeps the path-level
    // independence needed for the stderr).
    std::vector<double> pooled(static_cast<std::size_t>(n_paths));
    for (std::int64_t i = 0; i < n_paths; ++i) {
        KahanSum acc;
        std::int64_t used = 0;
        for (std::size_t j = 0; j < ny; ++j) {
            if (!rejected[static_cast<std::size_t>(i) * ny + j]) {
                acc.add(rhs[static_cast<std::size_t>(i) * ny + j]);
                ++used;
            }
        }
        const double rhs_avg = used > 0 ? acc.value() / static_cast<double>(used) : 0.0;
        pooled[static_cast<std::size_t>(i)] = lhs[static_cast<std::size_t>(i)] - rhs_avg;
    }
    const MeanStderr pooled_ms = mean_stderr(pooled);
    report.pooled = {pooled_ms.mean, pooled_ms.stderr_, n_paths, seed};

    std::vector<double> diff(static_cast<std::size_t>(n_paths));
    for (std::size_t j = 0; j < ny; ++j) {
        std::size_t used = 0;
        for (std::int64_t i = 0; i < n_paths; ++i) {
            if (!rejected[static_cast<std::size_t>(i) * ny + j]) {
                diff[used++] = lhs[static_cast<std::size_t>(i)] - rhs[static_cast<std::size_t>(i) * ny + j];
            }
        }
        diff.resize(used);
        const MeanStderr ms = mean_stderr(diff);
        report.per_y.push_back({ms.mean, ms.stderr_, static_cast<std::int64_t>(used), seed});
        diff.resize(static_cast<std::size_t>(n_paths));
    }
    report.rejected_y = 0;
    for (std::uint8_t r : rejected) {
        report.rejected_y += r;
    }
    const MeanStderr lhs_ms = mean_stderr(lhs);
    report.lhs_mean = lhs_ms.mean;
    report.rhs_mean = lhs_ms.mean - pooled_ms.mean;
    return report;
}

std::vector<TranslationRow> translation_profile(const Ensemble& ensemble, const ProjPoint& x,
                                                std::int64_t n, std::int64_t n_paths,
                                                const TestFunction& h,
                                                const std::vector<double>& shifts,
                                                std::uint64_t seed,
                                                std::int64_t prediction_samples,
                                                std::int64_t stationary_depth, unsigned workers)
{
    for (double s : shifts) {
        if (!(s > 0.0)) {
            throw_error(ErrorKind::ConfigError, "shifts must be positive");
        }
    }
    std::vector<double> cuts(static_cast<std::size_t>(n_paths));
    std::vector<double> sums(static_cast<std::size_t>(n_paths));
    std::vector<double> phis(static_cast<std::size_t>(n_paths));
    mc::for_each_sample(n_paths, seed, kSaltTranslate, workers, [&](std::int64_t i, RngStream& rng) {
        const RhoPathData d = scan_rho_path(ensemble, x, n, 1.0, rng);
        cuts[static_cast<std::size_t>(i)] = d.cut;
        sums[static_cast<std::size_t>(i)] = d.s;
        phis[static_cast<std::size_t>(i)] = h.phi(ProjPoint(d.terminal));
    });

    // Prediction: int h d(nu x Leb) = (mean of phi under nu) * int psi.
    const double psi_total = h.psi.integral();
    std::vector<double> phi_nu(static_cast<std::size_t>(prediction_samples));
    mc::for_each_sample(prediction_samples, seed, kSaltPrediction, workers,
                        [&](std::int64_t i, RngStream& rng) {
                            phi_nu[static_cast<std::size_t>(i)] =
                                h.phi(sample_stationary(ensemble, stationary_depth, rng));
                        });
    const MeanStderr phi_ms = mean_stderr(phi_nu);
    const double prediction = phi_ms.mean * psi_total;
    const double prediction_se = phi_ms.stderr_ * std::abs(psi_total);

    std::vector<TranslationRow> rows;
    rows.reserve(shifts.size());
    std::vector<double> values(static_cast<std::size_t>(n_paths));
    for (double shift : shifts) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            values[i] = phis[i] * h.psi.weighted_shifted_tail(cuts[i], sums[i] - shift) / shift;
        }
        const MeanStderr ms = mean_stderr(values);
        TranslationRow row;
        row.shift = shift;
        row.ratio = ms.mean;
        row.stderr_ = ms.stderr_;
        row.prediction = prediction;
        row.prediction_stderr = prediction_se;
        row.relative_deviation = prediction != 0.0 ? std::abs(ms.mean - prediction) / std::abs(prediction)
                                                   : std::abs(ms.mean);
        rows.push_back(row);
    }
    return rows;
}

NegativeTailReport negative_tail_report(const Ensemble& ensemble, const ProjPoint& x,
                                        std::int64_t n, std::int64_t n_paths, Direction direction,
                                        std::uint64_t seed, double fit_span, unsigned workers)
{
    const double sign = direction_sign(direction);
    std::vector<double> ramp_start(static_cast<std::size_t>(n_paths));
    std::vector<double> s_vals(static_cast<std::size_t>(n_paths));
    std::vector<double> mass(static_cast<std::size_t>(n_paths));
    mc::for_each_sample(n_paths, seed, kSaltTail, workers, [&](std::int64_t i, RngStream& rng) {
        const RhoPathData d = scan_rho_path(ensemble, x, n, sign, rng);
        const double lo = d.cut + d.s;
        ramp_start[static_cast<std::size_t>(i)] = lo;
        s_vals[static_cast<std::size_t>(i)] = d.s;
        mass[static_cast<std::size_t>(i)] = lo < 0.0 ? d.s * lo - 0.5 * lo * lo : 0.0;
    });
    const MeanStderr mass_ms = mean_stderr(mass);

    NegativeTailReport report;
    report.mass = mass_ms.mean;
    report.mass_stderr = mass_ms.stderr_;

    // Exponential fit of W on [-fit_span, 0].
    std::vector<double> us;
    std::vector<double> logw;
    const int grid = 12;
    std::vector<double> contrib(static_cast<std::size_t>(n_paths));
    for (int k = 0; k < grid; ++k) {
        const double u = -fit_span + fit_span * static_cast<double>(k) / static_cast<double>(grid);
        for (std::size_t i = 0; i < contrib.size(); ++i) {
            contrib[i] = u >= ramp_start[i] ? u - s_vals[i] : 0.0;
        }
        const MeanStderr ms = mean_stderr(contrib);
        if (ms.mean > 0.0) {
            us.push_back(u);
            logw.push_back(std::log(ms.mean));
        }
    }
    if (us.size() >= 3) {
        const LinearFit fit = linear_fit(us, logw);
        report.fit_rate = fit.slope;
        report.fit_rate_stderr = fit.slope_stderr;
        report.fit_points = static_cast<std::int64_t>(us.size());
    }
    return report;
}

ClltReport cllt_ratio(const Ensemble& ensemble, const ProjPoint& x, double t,
                      const std::vector<std::int64_t>& n_list, std::int64_t n_paths,
                      const TestFunction& h, const ClltReferences& refs, std::uint64_t seed,
                      unsigned workers)
{
    if (refs.upsilon_sq <= 0.0 || refs.rho_h == 0.0) {
        throw_error(ErrorKind::ConfigError, "references must carry positive variance and nonzero rho(h)");
    }
    const double upsilon = std::sqrt(refs.upsilon_sq);
    const double denominator =
        2.0 * refs.v_hat / (std::sqrt(2.0 * 3.14159265358979323846) * upsilon * upsilon * upsilon) *
        refs.rho_h;

    std::vector<std::int64_t> sorted = n_list;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i] <= sorted[i - 1]) {
            throw_error(ErrorKind::ConfigError, "horizons must be strictly increasing");
        }
    }
    const std::size_t levels = sorted.size();
    const std::int64_t n_max = sorted.back();
    std::vector<double> numerators(static_cast<std::size_t>(n_paths) * levels, 0.0);
    mc::for_each_sample(n_paths, seed, kSaltCllt, workers, [&](std::int64_t i, RngStream& rng) {
        Vector v = x.coords();
        Vector scratch(v.size());
        GroupElement storage = GroupElement::identity(v.size());
        double sum = 0.0;
        std::size_t level = 0;
        bool alive = true; // tau_{x,t} > k-1 tracked incrementally
        for (std::int64_t k = 1; k <= n_max && level < levels; ++k) {
            sum += step_direction(ensemble.draw_ref(rng, storage), v, scratch);
            while (level < levels && sorted[level] == k) {
                if (alive) {
                    numerators[static_cast<std::size_t>(i) * levels + level] =
                        h(ProjPoint(v), t + sum);
                }
                ++level;
            }
            if (t + sum < 0.0) {
                alive = false; // affects horizons strictly beyond k
            }
        }
    });

    ClltReport report;
    std::vector<double> inv_sqrt_n;
    std::vector<double> ratios;
    std::vector<double> vals(static_cast<std::size_t>(n_paths));
    for (std::size_t l = 0; l < levels; ++l) {
        for (std::int64_t i = 0; i < n_paths; ++i) {
            vals[static_cast<std::size_t>(i)] = numerators[static_cast<std::size_t>(i) * levels + l];
        }
        const MeanStderr ms = mean_stderr(vals);
        const double scale = std::pow(static_cast<double>(sorted[l]), 1.5) / denominator;
        report.rows.push_back({sorted[l], ms.mean * scale, ms.stderr_ * std::abs(scale)});
        inv_sqrt_n.push_back(1.0 / std::sqrt(static_cast<double>(sorted[l])));
        ratios.push_back(ms.mean * scale);
    }
    if (report.rows.size() >= 3) {
        const LinearFit fit = linear_fit(inv_sqrt_n, ratios);
        report.trend_slope = fit.slope;
        report.trend_slope_stderr = fit.slope_stderr;
    }
    return report;
}

} // namespace linwalk
