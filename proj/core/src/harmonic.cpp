// SPDX-License-Identifier: Apache-2.0
#include "linwalk/harmonic.hpp"

#include <cmath>

namespace linwalk {

namespace {

constexpr std::uint64_t kSaltV = 0x5601;
constexpr std::uint64_t kSaltVar = 0x5602;
constexpr std::uint64_t kSaltSurvival = 0x5603;

/// Walks one path without storing it, returning, for each requested horizon,
/// the pair (S_n, running max of -sign*S over 1..n). The exit event
/// {tau > n} is then {t >= barrier}.
struct HorizonStat {
    double s_n = 0.0;
    double barrier = 0.0; // max_{k<=n} (-sign * S_k)
};

void scan_horizons(const Ensemble& ensemble, const ProjPoint& x, double sign,
                   const std::vector<std::int64_t>& n_list, RngStream& rng,
                   std::vector<HorizonStat>& out)
{
    Vector v = x.coords();
    Vector scratch(v.size());
    GroupElement storage = GroupElement::identity(v.size());
    double sum = 0.0;
    double barrier = -std::numeric_limits<double>::infinity();
    std::size_t level = 0;
    const std::int64_t n_max = n_list.back();
    for (std::int64_t k = 1; k <= n_max && level < n_list.size(); ++k) {
        sum += step_direction(ensemble.draw_ref(rng, storage), v, scratch);
        barrier = std::max(barrier, -sign * sum);
        while (level < n_list.size() && n_list[level] == k) {
            out[level] = {sum, barrier};
            ++level;
        }
    }
}

} // namespace

WeightedEstimate estimate_V(const Ensemble& ensemble, const ProjPoint& x, double t,
                            std::int64_t n, std::int64_t n_paths, Direction direction,
                            std::uint64_t seed, unsigned workers)
{
    if (n < 1 || n_paths < 2) {
        throw_error(ErrorKind::ConfigError, "need n >= 1 and n_paths >= 2");
    }
    const double sign = direction == Direction::Plus ? 1.0 : -1.0;
    const std::vector<std::int64_t> n_list{n};
    return mc::sample_mean(n_paths, seed, kSaltV, workers, [&](std::int64_t, RngStream& rng) {
        std::vector<HorizonStat> stat(1);
        scan_horizons(ensemble, x, sign, n_list, rng, stat);
        return t >= stat[0].barrier ? t + sign * stat[0].s_n : 0.0;
    });
}

VGrid estimate_V_grid(const Ensemble& ensemble, const ProjPoint& x,
                      const std::vector<std::int64_t>& n_list, const std::vector<double>& t_list,
                      std::int64_t n_paths, Direction direction, std::uint64_t seed,
                      unsigned workers)
{
    for (std::size_t i = 1; i < n_list.size(); ++i) {
        if (n_list[i] <= n_list[i - 1]) {
            throw_error(ErrorKind::ConfigError, "horizons must be strictly increasing");
        }
    }
    const double sign = direction == Direction::Plus ? 1.0 : -1.0;
    const std::size_t levels = n_list.size();
    std::vector<HorizonStat> stats(static_cast<std::size_t>(n_paths) * levels);
    mc::for_each_sample(n_paths, seed, kSaltV, workers, [&](std::int64_t i, RngStream& rng) {
        std::vector<HorizonStat> row(levels);
        scan_horizons(ensemble, x, sign, n_list, rng, row);
        std::copy(row.begin(), row.end(), stats.begin() + static_cast<std::ptrdiff_t>(i) * static_cast<std::ptrdiff_t>(levels));
    });

    VGrid grid{n_list, t_list, {}};
    grid.estimates.resize(levels);
    std::vector<double> values(static_cast<std::size_t>(n_paths));
    for (std::size_t ln = 0; ln < levels; ++ln) {
        grid.estimates[ln].reserve(t_list.size());
        for (double t : t_list) {
            for (std::int64_t i = 0; i < n_paths; ++i) {
                const HorizonStat& st = stats[static_cast<std::size_t>(i) * levels + ln];
                values[static_cast<std::size_t>(i)] = t >= st.barrier ? t + sign * st.s_n : 0.0;
            }
            const MeanStderr ms = mean_stderr(values);
            grid.estimates[ln].push_back({ms.mean, ms.stderr_, n_paths, seed});
        }
    }
    return grid;
}

VarianceEstimate estimate_variance(const Ensemble& ensemble, const ProjPoint& x, std::int64_t n,
                                   std::int64_t n_paths, std::uint64_t seed, unsigned workers)
{
    if (n < 1 || n_paths < 2) {
        throw_error(ErrorKind::ConfigError, "need n >= 1 and n_paths >= 2");
    }
    std::vector<double> sq(static_cast<std::size_t>(n_paths));
    mc::for_each_sample(n_paths, seed, kSaltVar, workers, [&](std::int64_t i, RngStream& rng) {
        Vector v = x.coords();
        Vector scratch(v.size());
        GroupElement storage = GroupElement::identity(v.size());
        double sum = 0.0;
        for (std::int64_t k = 0; k < n; ++k) {
            sum += step_direction(ensemble.draw_ref(rng, storage), v, scratch);
        }
        sq[static_cast<std::size_t>(i)] = sum * sum;
    });
    const MeanStderr ms = mean_stderr(sq);
    VarianceEstimate est;
    est.upsilon_sq = ms.mean / static_cast<double>(n);
    est.stderr_ = ms.stderr_ / static_cast<double>(n);
    est.n_used = n_paths;
    est.degenerate = est.upsilon_sq < 1e-8;
    return est;
}

SurvivalCurve survival_curve(const Ensemble& ensemble, const ProjPoint& x, double t,
                             const std::vector<std::int64_t>& n_list, std::int64_t n_paths,
                             std::uint64_t seed, unsigned workers)
{
    for (std::size_t i = 1; i < n_list.size(); ++i) {
        if (n_list[i] <= n_list[i - 1]) {
            throw_error(ErrorKind::ConfigError, "horizons must be strictly increasing");
        }
    }
    const std::size_t levels = n_list.size();
    const std::int64_t n_max = n_list.back();
    std::vector<std::uint8_t> alive(static_cast<std::size_t>(n_paths) * levels, 0);
    mc::for_each_sample(n_paths, seed, kSaltSurvival, workers, [&](std::int64_t i, RngStream& rng) {
        Vector v = x.coords();
        Vector scratch(v.size());
        GroupElement storage = GroupElement::identity(v.size());
        double sum = 0.0;
        std::size_t level = 0;
        for (std::int64_t k = 1; k <= n_max && level < levels; ++k) {
            sum += step_direction(ensemble.draw_ref(rng, storage), v, scratch);
            if (t + sum < 0.0) {
                break; // exited: all remaining horizons dead
            }
            while (level < levels && n_list[level] == k) {
                alive[static_cast<std::size_t>(i) * levels + level] = 1;
                ++level;
            }
        }
    });

    SurvivalCurve curve;
    std::vector<double> log_n;
    std::vector<double> log_p;
    for (std::size_t l = 0; l < levels; ++l) {
        std::size_t hits = 0;
        for (std::int64_t i = 0; i < n_paths; ++i) {
            hits += alive[static_cast<std::size_t>(i) * levels + l];
        }
        const MeanStderr ms = proportion_stderr(hits, static_cast<std::size_t>(n_paths));
        curve.rows.push_back({n_list[l], ms.mean, ms.stderr_});
        if (ms.mean > 0.0) {
            log_n.push_back(std::log(static_cast<double>(n_list[l])));
            log_p.push_back(std::log(ms.mean));
        }
    }
    if (log_n.size() >= 2) {
        const LinearFit fit = linear_fit(log_n, log_p);
        curve.loglog_slope = fit.slope;
        curve.slope_stderr = fit.slope_stderr;
    }
    return curve;
}

UniformitySweep v_uniformity_sweep(const Ensemble& ensemble, double t, std::int64_t n,
                                   std::int64_t n_paths, std::int64_t x_count,
                                   Direction direction, std::uint64_t seed, unsigned workers)
{
    if (x_count < 2) {
        throw_error(ErrorKind::ConfigError, "need at least two starting directions");
    }
    UniformitySweep sweep;
    RngStream dirs(seed, 0xD1);
    for (std::int64_t i = 0; i < x_count; ++i) {
        Vector v(ensemble.dim());
        for (int j = 0; j < ensemble.dim(); ++j) {
            v[j] = dirs.normal();
        }
        sweep.points.emplace_back(v);
        sweep.estimates.push_back(estimate_V(ensemble, sweep.points.back(), t, n, n_paths,
                                             direction, seed + 1 + static_cast<std::uint64_t>(i),
                                             workers));
    }
    for (std::size_t i = 0; i < sweep.estimates.size(); ++i) {
        for (std::size_t j = i + 1; j < sweep.estimates.size(); ++j) {
            const double gap = std::abs(sweep.estimates[i].value - sweep.estimates[j].value);
            const double se = std::sqrt(sweep.estimates[i].stderr_ * sweep.estimates[i].stderr_ +
                                        sweep.estimates[j].stderr_ * sweep.estimates[j].stderr_);
            if (gap > sweep.max_spread) {
                sweep.max_spread = gap;
            }
            if (se > 0.0 && gap / se > sweep.max_spread_z) {
                sweep.max_spread_z = gap / se;
            }
        }
    }
    return sweep;
}

} // namespace linwalk
