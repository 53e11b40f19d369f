// SPDX-License-Identifier: Apache-2.0
#include "linwalk/path.hpp"

#include <cmath>
#include <limits>

namespace linwalk {

PathRecord simulate_path(const Ensemble& ensemble, const ProjPoint& x, std::int64_t n,
                         bool keep_elements, RngStream& rng)
{
    if (n < 1) {
        throw_error(ErrorKind::ConfigError, "n must be >= 1");
    }
    PathRecord rec{x, {}, {}, 0, 0, 0, 0, x, {}};
    rec.increments.reserve(static_cast<std::size_t>(n));
    rec.partial_sums.reserve(static_cast<std::size_t>(n));
    if (keep_elements) {
        rec.elements.reserve(static_cast<std::size_t>(n));
    }
    Vector v = x.coords();
    Vector scratch(v.size());
    double sum = 0.0;
    double min_prefix = std::numeric_limits<double>::infinity();
    double max_prefix = -std::numeric_limits<double>::infinity();
    double min_all = std::numeric_limits<double>::infinity();
    double max_all = -std::numeric_limits<double>::infinity();
    for (std::int64_t k = 1; k <= n; ++k) {
        const GroupElement g = ensemble.draw(rng);
        const double inc = step_direction(g, v, scratch);
        sum += inc;
        rec.increments.push_back(inc);
        rec.partial_sums.push_back(sum);
        if (k < n) {
            min_prefix = std::min(min_prefix, sum);
            max_prefix = std::max(max_prefix, sum);
        }
        min_all = std::min(min_all, sum);
        max_all = std::max(max_all, sum);
        if (keep_elements) {
            rec.elements.push_back(g);
        }
    }
    rec.min_prefix = min_prefix;
    rec.max_prefix = max_prefix;
    rec.min_all = min_all;
    rec.max_all = max_all;
    rec.terminal_point = ProjPoint(v);
    return rec;
}

ExitTime exit_time(const PathRecord& path, double t, Direction direction)
{
    const double sign = direction == Direction::Plus ? 1.0 : -1.0;
    for (std::size_t k = 0; k < path.partial_sums.size(); ++k) {
        if (t + sign * path.partial_sums[k] < 0.0) {
            return {static_cast<std::int64_t>(k + 1), false};
        }
    }
    return {path.length(), true};
}

ExitTime level_crossing_time(const PathRecord& path, double t, double level)
{
    for (std::size_t k = 0; k < path.partial_sums.size(); ++k) {
        if (std::abs(t + path.partial_sums[k]) >= level) {
            return {static_cast<std::int64_t>(k + 1), false};
        }
    }
    return {path.length(), true};
}

ReversedRecord reversed_walk_values(const PathRecord& path, const DualProjPoint& y)
{
    if (path.elements.empty()) {
        throw_error(ErrorKind::ConfigError, "path must retain its elements");
    }
    const std::int64_t m = path.length();
    const auto& g = path.elements;

    // Suffix directions z_k = g_{k+1} ... g_m x, right to left; z_m = x.
    std::vector<ProjPoint> suffix;
    suffix.reserve(static_cast<std::size_t>(m) + 1);
    suffix.push_back(path.x0); // z_m
    for (std::int64_t k = m - 1; k >= 0; --k) {
        suffix.push_back(act(g[static_cast<std::size_t>(k)], suffix.back()));
    }
    // suffix[m - k] == z_k; suffix[m] == g_1...g_m x.
    const ProjPoint& terminal_reversed = suffix.back();

    const double d0 = delta(terminal_reversed, y);
    if (std::isinf(d0)) {
        throw_error(ErrorKind::InfiniteDelta, "y orthogonal to the order-reversed product direction");
    }

    ReversedRecord rec{y, m, {}, 0.0, terminal_reversed};
    rec.values.reserve(static_cast<std::size_t>(m));

    // Dual-walk state: y_k = g_k^{-1} ... g_1^{-1} y, whose action matrix is
    // the plain transpose of the letters; the increment of
    // -sigma*(g_k^{-1}...g_1^{-1}, y) at step k is -log ||g_k^T y_{k-1}||.
    Vector phi = y.coords();
    Vector scratch(phi.size());
    double dual_sum = 0.0;
    double threshold = -std::numeric_limits<double>::infinity();
    for (std::int64_t k = 1; k <= m; ++k) {
        dual_sum -= step_direction_transpose(g[static_cast<std::size_t>(k - 1)], phi, scratch);
        const double dk = delta(suffix[static_cast<std::size_t>(m - k)], DualProjPoint(phi));
        if (std::isinf(dk)) {
            throw_error(ErrorKind::InfiniteDelta, "suffix direction orthogonal to shifted y");
        }
        const double value = dual_sum + dk - d0;
        rec.values.push_back(value);
        threshold = std::max(threshold, -value);
    }
    rec.threshold = threshold;
    return rec;
}

IdealPerturbedPath ideal_perturbed_path(const Ensemble& ensemble, const DualProjPoint& y,
                                        std::int64_t n, std::int64_t boundary_depth,
                                        const ProjPoint& x0, RngStream& rng)
{
    if (n < 1 || boundary_depth < 1) {
        throw_error(ErrorKind::ConfigError, "n and boundary_depth must be >= 1");
    }
    const std::int64_t total = n + boundary_depth;
    std::vector<GroupElement> letters;
    letters.reserve(static_cast<std::size_t>(total));
    for (std::int64_t k = 0; k < total; ++k) {
        letters.push_back(ensemble.draw(rng));
    }
    auto truncated_boundary = [&](std::int64_t from) {
        // g_{from+1} ... g_{from+L} x0, letters applied right to left.
        Vector v = x0.coords();
        Vector scratch(v.size());
        for (std::int64_t i = from + boundary_depth; i > from; --i) {
            step_direction(letters[static_cast<std::size_t>(i - 1)], v, scratch);
        }
        return ProjPoint(v);
    };

    const double f0 = delta(truncated_boundary(0), y);
    if (std::isinf(f0)) {
        throw_error(ErrorKind::InfiniteDelta, "y orthogonal to the truncated boundary direction");
    }

    IdealPerturbedPath out;
    out.truncation_depth = boundary_depth;
    out.values.reserve(static_cast<std::size_t>(n));
    Vector phi = y.coords();
    Vector scratch(phi.size());
    double dual_sum = 0.0;
    for (std::int64_t k = 1; k <= n; ++k) {
        dual_sum -= step_direction_transpose(letters[static_cast<std::size_t>(k - 1)], phi, scratch);
        const double fk = delta(truncated_boundary(k), DualProjPoint(phi));
        if (std::isinf(fk)) {
            throw_error(ErrorKind::InfiniteDelta, "shifted boundary perturbation is infinite");
        }
        out.values.push_back(dual_sum + fk - f0);
    }
    return out;
}

ExitTime perturbed_exit_time(const std::vector<double>& values, double t)
{
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (t + values[k] < 0.0) {
            return {static_cast<std::int64_t>(k + 1), false};
        }
    }
    return {static_cast<std::int64_t>(values.size()), true};
}

} // namespace linwalk
