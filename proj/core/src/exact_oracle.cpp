// SPDX-License-Identifier: Apache-2.0
#include "linwalk/exact_oracle.hpp"

#include <cmath>

namespace linwalk {

namespace oracle_detail {

void check_guard(std::size_t k, std::int64_t n)
{
    double size = 1.0;
    for (std::int64_t i = 0; i < n; ++i) {
        size *= static_cast<double>(k);
        if (size > static_cast<double>(kEnumerationGuard)) {
            throw_error(ErrorKind::TooLarge, "enumeration exceeds the k^n guard");
        }
    }
}

} // namespace oracle_detail

PathRecord path_from_letters(const std::vector<GroupElement>& letters, const ProjPoint& x)
{
    PathRecord rec{x, {}, {}, 0, 0, 0, 0, x, letters};
    Vector v = x.coords();
    double sum = 0.0;
    double min_prefix = std::numeric_limits<double>::infinity();
    double max_prefix = -std::numeric_limits<double>::infinity();
    double min_all = std::numeric_limits<double>::infinity();
    double max_all = -std::numeric_limits<double>::infinity();
    const std::int64_t n = static_cast<std::int64_t>(letters.size());
    for (std::int64_t k = 1; k <= n; ++k) {
        v = letters[static_cast<std::size_t>(k - 1)].mat() * v;
        const double norm = v.norm();
        sum += std::log(norm);
        v /= norm;
        rec.increments.push_back(std::log(norm));
        rec.partial_sums.push_back(sum);
        if (k < n) {
            min_prefix = std::min(min_prefix, sum);
            max_prefix = std::max(max_prefix, sum);
        }
        min_all = std::min(min_all, sum);
        max_all = std::max(max_all, sum);
    }
    rec.min_prefix = min_prefix;
    rec.max_prefix = max_prefix;
    rec.min_all = min_all;
    rec.max_all = max_all;
    rec.terminal_point = ProjPoint(v);
    return rec;
}

std::vector<PathAtom> enumerate_paths(const Ensemble& ensemble, const ProjPoint& x, std::int64_t n)
{
    if (!ensemble.is_discrete()) {
        throw_error(ErrorKind::ConfigError, "enumeration requires a finite-support ensemble");
    }
    if (n < 1) {
        throw_error(ErrorKind::ConfigError, "n must be >= 1");
    }
    const auto& atoms = ensemble.atoms();
    const auto& weights = ensemble.weights();
    oracle_detail::check_guard(atoms.size(), n);

    std::vector<PathAtom> out;
    oracle_detail::for_each_tuple(atoms.size(), n, [&](const std::vector<std::size_t>& idx) {
        double probability = 1.0;
        std::vector<double> sums;
        sums.reserve(idx.size());
        Vector v = x.coords();
        double sum = 0.0;
        double min_prefix = std::numeric_limits<double>::infinity();
        double min_all = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < idx.size(); ++k) {
            probability *= weights[idx[k]];
            v = atoms[idx[k]].mat() * v;
            const double norm = v.norm();
            sum += std::log(norm);
            v /= norm;
            sums.push_back(sum);
            if (k + 1 < idx.size()) {
                min_prefix = std::min(min_prefix, sum);
            }
            min_all = std::min(min_all, sum);
        }
        out.push_back(PathAtom{idx, probability, std::move(sums), min_prefix, min_all, ProjPoint(v)});
    });
    return out;
}

double exact_V(const Ensemble& ensemble, const ProjPoint& x, double t, std::int64_t n)
{
    KahanSum acc;
    for (const PathAtom& atom : enumerate_paths(ensemble, x, n)) {
        if (atom.min_all >= -t) {
            acc.add(atom.probability * (t + atom.partial_sums.back()));
        }
    }
    return acc.value();
}

double exact_rho_action(const Ensemble& ensemble, const ProjPoint& x, std::int64_t n,
                        const TestFunction& h, Direction direction)
{
    const double sign = direction == Direction::Plus ? 1.0 : -1.0;
    KahanSum acc;
    for (const PathAtom& atom : enumerate_paths(ensemble, x, n)) {
        double barrier = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k + 1 < atom.partial_sums.size(); ++k) {
            barrier = std::max(barrier, -sign * atom.partial_sums[k]);
        }
        const double cut = std::max(0.0, barrier);
        const double s = sign * atom.partial_sums.back();
        acc.add(atom.probability * h.phi(atom.terminal) * h.psi.weighted_shifted_tail(cut, s));
    }
    return acc.value();
}

double exact_harmonicity_residual(const Ensemble& ensemble, const ProjPoint& x, std::int64_t n,
                                  const TestFunction& h, Direction direction)
{
    const double sign = direction == Direction::Plus ? 1.0 : -1.0;
    const double lhs = exact_rho_action(ensemble, x, n + 1, h, direction);

    const auto& atoms = ensemble.atoms();
    const auto& weights = ensemble.weights();
    KahanSum rhs;
    for (const PathAtom& atom : enumerate_paths(ensemble, x, n)) {
        double barrier = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k + 1 < atom.partial_sums.size(); ++k) {
            barrier = std::max(barrier, -sign * atom.partial_sums[k]);
        }
        const double cut = std::max(0.0, barrier);
        const double s = sign * atom.partial_sums.back();
        const double lower = std::max(cut, -s);
        // R h expanded exactly over one extra letter.
        KahanSum inner;
        for (std::size_t j = 0; j < atoms.size(); ++j) {
            const double sigma_j = cocycle(atoms[j], atom.terminal);
            inner.add(weights[j] * h.phi(act(atoms[j], atom.terminal)) *
                      h.psi.weighted_shifted_tail(lower, s + sign * sigma_j));
        }
        rhs.add(atom.probability * inner.value());
    }
    return lhs - rhs.value();
}

std::pair<double, double> exact_duality_sides(const Ensemble& ensemble, const ProjPoint& x,
                                              const DualProjPoint& y, std::int64_t n,
                                              const TestFunction& h)
{
    const auto& atoms = ensemble.atoms();
    if (atoms.empty()) {
        throw_error(ErrorKind::ConfigError, "oracle requires a finite-support ensemble");
    }
    oracle_detail::check_guard(atoms.size(), n);
    const auto& weights = ensemble.weights();

    KahanSum lhs;
    KahanSum rhs;
    std::vector<GroupElement> letters(static_cast<std::size_t>(n), atoms[0]);
    oracle_detail::for_each_tuple(atoms.size(), n, [&](const std::vector<std::size_t>& idx) {
        double prob = 1.0;
        for (std::size_t j = 0; j < idx.size(); ++j) {
            letters[j] = atoms[idx[j]];
            prob *= weights[idx[j]];
        }
        const PathRecord path = path_from_letters(letters, x);
        const double cut = std::max(0.0, -path.min_prefix);
        lhs.add(prob * h.phi(path.terminal_point) *
                h.psi.weighted_shifted_tail(cut, path.partial_sums.back()));

        try {
            const ReversedRecord rev = reversed_walk_values(path, y);
            const PiecewiseLinear::TailIntegrals ti = h.psi.tails(rev.threshold);
            rhs.add(prob * h.phi(rev.terminal_point) * (ti.first + rev.values.back() * ti.mass));
        } catch (const Error& err) {
            if (err.kind() == ErrorKind::InfiniteDelta) {
                std::string which;
                for (std::size_t j = 0; j < idx.size(); ++j) {
                    which += std::to_string(idx[j]);
                }
                throw_error(ErrorKind::InfiniteDelta, "offending path " + which);
            }
            throw;
        }
    });
    return {lhs.value(), rhs.value()};
}

} // namespace linwalk
