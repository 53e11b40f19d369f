// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "linwalk/ensemble.hpp"
#include "linwalk/projective.hpp"

namespace linwalk {

enum class Direction { Plus, Minus };

/// One simulated trajectory of the renormalized walk
/// S_k = sigma(g_k ... g_1, x0), with the data every estimator consumes.
struct PathRecord {
    ProjPoint x0;
    std::vector<double> increments;    // sigma(g_k, g_{k-1}...g_1 x0)
    std::vector<double> partial_sums;  // S_1 .. S_n
    double min_prefix = 0.0;           // min S_1..S_{n-1}; +inf when n == 1
    double max_prefix = 0.0;           // max S_1..S_{n-1}; -inf when n == 1
    double min_all = 0.0;              // min S_1..S_n
    double max_all = 0.0;              // max S_1..S_n
    ProjPoint terminal_point;          // g_n ... g_1 x0
    std::vector<GroupElement> elements; // kept only on request

    std::int64_t length() const { return static_cast<std::int64_t>(partial_sums.size()); }
};

/// Simulates n steps, renormalizing the direction every step so the partial
/// sums stay exact in log units regardless of n.
PathRecord simulate_path(const Ensemble& ensemble, const ProjPoint& x, std::int64_t n,
                         bool keep_elements, RngStream& rng);

/// Exit step, or censored at the record length when the walk never leaves
/// the half-line within the horizon. Estimators must treat censored as
/// {tau > n}.
struct ExitTime {
    std::int64_t step = 0;
    bool censored = false;
};

/// Plus: min{k >= 1 : t + S_k < 0}. Minus: min{k >= 1 : t - S_k < 0}.
/// The unperturbed stopping time of the abstract framework is the same
/// computation.
ExitTime exit_time(const PathRecord& path, double t, Direction direction);

/// First k with |t + S_k| >= level (censored at the horizon).
ExitTime level_crossing_time(const PathRecord& path, double t, double level);

/// Reversed walk values for a retained-element path:
///   R_k = -sigma*(g_k^{-1}...g_1^{-1}, y)
///         + delta(g_{k+1}...g_m x, g_k^{-1}...g_1^{-1} y)
///         - delta(g_1...g_m x, y),      1 <= k <= m.
/// Computed in one pass with suffix direction vectors maintained right to
/// left. Throws InfiniteDelta when y is numerically orthogonal to a suffix
/// direction (the caller resamples y).
struct ReversedRecord {
    DualProjPoint y;
    std::int64_t m = 0;
    std::vector<double> values;    // R_1 .. R_m
    double threshold = 0.0;        // max_k(-R_k): t-level where all R stay >= -t
    ProjPoint terminal_point;      // g_1 ... g_m x (order-reversed product)
};

ReversedRecord reversed_walk_values(const PathRecord& path, const DualProjPoint& y);

/// Perturbed dual walk with the depth-truncated boundary perturbation:
///   W_k = -sigma*(g_k^{-1}...g_1^{-1}, y) + f_hat(T^k) - f_hat,
/// where f_hat(T^k) = delta(g_{k+1}...g_{k+L} x0, g_k^{-1}...g_1^{-1} y).
/// Draws n + boundary_depth letters.
struct IdealPerturbedPath {
    std::vector<double> values; // W_1 .. W_n
    std::int64_t truncation_depth = 0;
};

IdealPerturbedPath ideal_perturbed_path(const Ensemble& ensemble, const DualProjPoint& y,
                                        std::int64_t n, std::int64_t boundary_depth,
                                        const ProjPoint& x0, RngStream& rng);

/// min{k : t + values[k] < 0}, censored at the list length.
ExitTime perturbed_exit_time(const std::vector<double>& values, double t);

} // namespace linwalk
