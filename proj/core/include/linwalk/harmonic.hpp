// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "linwalk/estimate.hpp"
#include "linwalk/path.hpp"

namespace linwalk {

/// V_n(x, t) estimated over N fresh paths:
///   plus:  mean of (t + S_n) 1{exit > n},
///   minus: mean of (t - S_n) 1{reverse exit > n}.
WeightedEstimate estimate_V(const Ensemble& ensemble, const ProjPoint& x, double t,
                            std::int64_t n, std::int64_t n_paths, Direction direction,
                            std::uint64_t seed, unsigned workers = 1);

/// V_n over a grid of horizons and levels with common random numbers: all
/// entries are computed on the SAME path set, so nested-event comparisons
/// (monotonicity in n) carry far less variance than independent runs.
struct VGrid {
    std::vector<std::int64_t> n_list;
    std::vector<double> t_list;
    // estimates[i_n][i_t]
    std::vector<std::vector<WeightedEstimate>> estimates;
};

VGrid estimate_V_grid(const Ensemble& ensemble, const ProjPoint& x,
                      const std::vector<std::int64_t>& n_list, const std::vector<double>& t_list,
                      std::int64_t n_paths, Direction direction, std::uint64_t seed,
                      unsigned workers = 1);

/// Asymptotic variance upsilon^2 ~ (1/n) E S_n^2; stderr by the delta
/// method. Flags degeneracy below 1e-8 (the limit theory requires
/// upsilon > 0).
VarianceEstimate estimate_variance(const Ensemble& ensemble, const ProjPoint& x, std::int64_t n,
                                   std::int64_t n_paths, std::uint64_t seed,
                                   unsigned workers = 1);

struct SurvivalRow {
    std::int64_t n = 0;
    double survival = 0.0;
    double stderr_ = 0.0;
};

struct SurvivalCurve {
    std::vector<SurvivalRow> rows;
    double loglog_slope = 0.0; // fit of log P(tau > n) against log n
    double slope_stderr = 0.0;
};

/// Survival probabilities P(tau_{x,t} > n) on shared paths; the events are
/// nested, so the empirical curve is non-increasing by construction.
SurvivalCurve survival_curve(const Ensemble& ensemble, const ProjPoint& x, double t,
                             const std::vector<std::int64_t>& n_list, std::int64_t n_paths,
                             std::uint64_t seed, unsigned workers = 1);

struct UniformitySweep {
    std::vector<ProjPoint> points;
    std::vector<WeightedEstimate> estimates;
    double max_spread = 0.0;   // largest pairwise |V_i - V_j|
    double max_spread_z = 0.0; // spread over its combined stderr
};

/// V_n(x, t) across a fixed grid of starting directions. The limits are
/// uniform in x, so the spread should be explained by the error bars.
UniformitySweep v_uniformity_sweep(const Ensemble& ensemble, double t, std::int64_t n,
                                   std::int64_t n_paths, std::int64_t x_count,
                                   Direction direction, std::uint64_t seed,
                                   unsigned workers = 1);

} // namespace linwalk
