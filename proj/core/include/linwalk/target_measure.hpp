// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "linwalk/estimate.hpp"
#include "linwalk/harmonic.hpp"
#include "linwalk/path.hpp"
#include "linwalk/test_function.hpp"

namespace linwalk {

/// Action of the n-step target-measure approximant rho_{n,x} on h = phi x psi:
///   (1/N) sum_i  phi(x_n^i)  int_{c_i}^inf  t psi(t + s_i) dt,
/// with s_i = +-S_n and c_i = max(0, max_{k <= n-1} (-+S_k)). The inner
/// integral is closed-form; Monte Carlo error lives only on the path axis.
WeightedEstimate estimate_rho_action(const Ensemble& ensemble, const ProjPoint& x, std::int64_t n,
                                     std::int64_t n_paths, const TestFunction& h,
                                     Direction direction, std::uint64_t seed,
                                     unsigned workers = 1);

struct DensityRow {
    double u = 0.0;
    double w = 0.0;
    double stderr_ = 0.0;
};

/// Marginal density estimate W_n(u) = mean_i (u - s_i) 1{u >= c_i + s_i}.
/// Each path contributes a non-decreasing ramp, so the estimate is
/// non-decreasing in u by construction; no binning is involved.
std::vector<DensityRow> density_W(const Ensemble& ensemble, const ProjPoint& x, std::int64_t n,
                                  std::int64_t n_paths, const std::vector<double>& u_grid,
                                  Direction direction, std::uint64_t seed, unsigned workers = 1);

/// rho_{n+1,x}(h) - rho_{n,x}(R h) on shared paths, with R h evaluated by
/// inner Monte Carlo over `inner_draws` fresh letters. Zero in expectation
/// for every finite n by the Markov property.
WeightedEstimate harmonicity_residual(const Ensemble& ensemble, const ProjPoint& x, std::int64_t n,
                                      std::int64_t n_paths, const TestFunction& h,
                                      std::int64_t inner_draws, Direction direction,
                                      std::uint64_t seed, unsigned workers = 1);

struct ReversalReport {
    WeightedEstimate pooled;        // mean over paths of lhs_i - mean_y rhs_iy
    std::vector<WeightedEstimate> per_y;
    std::int64_t rejected_y = 0;    // infinite-delta draws of y (resampled)
    double lhs_mean = 0.0;
    double rhs_mean = 0.0;
};

/// Both sides of the reversal identity on shared paths: the left side is the
/// per-path rho action; the right side integrates against the reversed walk
/// values for each stationary dual draw y. The per-y residual is zero in
/// expectation for every y with finite deltas.
ReversalReport reversal_residual(const Ensemble& ensemble, const ProjPoint& x, std::int64_t n,
                                 std::int64_t n_paths, std::int64_t n_y, const TestFunction& h,
                                 std::uint64_t seed, std::int64_t stationary_depth = kDefaultStationaryDepth,
                                 unsigned workers = 1);

struct TranslationRow {
    double shift = 0.0;
    double ratio = 0.0;        // (1/shift) rho_n(h(., . - shift))
    double stderr_ = 0.0;
    double prediction = 0.0;   // int h d(nu x Leb)
    double prediction_stderr = 0.0;
    double relative_deviation = 0.0;
};

std::vector<TranslationRow> translation_profile(const Ensemble& ensemble, const ProjPoint& x,
                                                std::int64_t n, std::int64_t n_paths,
                                                const TestFunction& h,
                                                const std::vector<double>& shifts,
                                                std::uint64_t seed,
                                                std::int64_t prediction_samples = 10000,
                                                std::int64_t stationary_depth = kDefaultStationaryDepth,
                                                unsigned workers = 1);

struct NegativeTailReport {
    double mass = 0.0;          // rho_n mass of P(V) x (-inf, 0]
    double mass_stderr = 0.0;
    double fit_rate = 0.0;      // slope of log W on [-fit_span, 0]
    double fit_rate_stderr = 0.0;
    std::int64_t fit_points = 0;
};

NegativeTailReport negative_tail_report(const Ensemble& ensemble, const ProjPoint& x,
                                        std::int64_t n, std::int64_t n_paths, Direction direction,
                                        std::uint64_t seed, double fit_span = 20.0,
                                        unsigned workers = 1);

struct ClltRow {
    std::int64_t n = 0;
    double ratio = 0.0;
    double stderr_ = 0.0;
};

struct ClltReferences {
    double v_hat = 0.0;      // V(x, t)
    double upsilon_sq = 0.0; // asymptotic variance
    double rho_h = 0.0;      // limiting rho(h)
};

struct ClltReport {
    std::vector<ClltRow> rows;
    double trend_slope = 0.0; // ratio fitted against 1/sqrt(n)
    double trend_slope_stderr = 0.0;
};

/// Diagnostic ratio n^{3/2} E(h(x_n, t + S_n); tau > n-1) divided by the
/// predicted limit 2 V / (sqrt(2 pi) upsilon^3) * rho(h). No convergence
/// rate is asserted; this check is reported as a diagnostic only.
ClltReport cllt_ratio(const Ensemble& ensemble, const ProjPoint& x, double t,
                      const std::vector<std::int64_t>& n_list, std::int64_t n_paths,
                      const TestFunction& h, const ClltReferences& refs, std::uint64_t seed,
                      unsigned workers = 1);

} // namespace linwalk
