// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "linwalk/path.hpp"
#include "linwalk/perturbed.hpp"
#include "linwalk/test_function.hpp"

namespace linwalk {

/// Hard ceiling on k^n enumeration size.
inline constexpr std::int64_t kEnumerationGuard = 10'000'000;

/// One enumerated trajectory of a finite-support ensemble.
struct PathAtom {
    std::vector<std::size_t> letters; // indices into the atom list
    double probability = 0.0;         // exact product of weights
    std::vector<double> partial_sums; // S_1 .. S_n
    double min_prefix = 0.0;          // min S_1..S_{n-1} (+inf for n = 1)
    double min_all = 0.0;             // min S_1..S_n
    ProjPoint terminal;               // g_n ... g_1 x
};

/// All k^n paths with exact probabilities and derived walk data. Throws
/// TooLarge past the guard.
std::vector<PathAtom> enumerate_paths(const Ensemble& ensemble, const ProjPoint& x, std::int64_t n);

/// Exact V_n(x, t) = sum_paths p (t + S_n) 1{min_{k<=n} S_k >= -t}.
double exact_V(const Ensemble& ensemble, const ProjPoint& x, double t, std::int64_t n);

/// Exact rho_{n,x}(h) with closed-form t-integrals per path.
double exact_rho_action(const Ensemble& ensemble, const ProjPoint& x, std::int64_t n,
                        const TestFunction& h, Direction direction = Direction::Plus);

/// Exact rho_{n+1,x}(h) - rho_{n,x}(R h), with R h expanded over one extra
/// letter; zero to rounding by the Markov property.
double exact_harmonicity_residual(const Ensemble& ensemble, const ProjPoint& x, std::int64_t n,
                                  const TestFunction& h, Direction direction = Direction::Plus);

/// Both sides of the reversal identity for a fixed dual point y, as exact
/// sums of closed-form t-integrals. Throws InfiniteDelta naming the
/// offending path if y is orthogonal to an enumerated direction.
std::pair<double, double> exact_duality_sides(const Ensemble& ensemble, const ProjPoint& x,
                                              const DualProjPoint& y, std::int64_t n,
                                              const TestFunction& h);

/// Builds a PathRecord (with elements) from explicit letters; shared by the
/// oracle and the tests.
PathRecord path_from_letters(const std::vector<GroupElement>& letters, const ProjPoint& x);

/// Exact twisted killed expectation E( (t + S~_n) theta ; tau^f > n ) from a
/// fixed start, enumerating n + horizon letters.
template <typename Space>
double exact_U(const Space& space, const Ensemble& ensemble, const Perturbation<Space>& f,
               const TwistFunction& theta, const typename Space::Point& start, double t,
               std::int64_t n);

/// Exact chain functional W_n(a, t) for a fixed initial window, enumerating
/// the fresh letters, evaluated through the chain transition machinery.
template <typename Space>
double exact_W_chain(const Space& space, const Ensemble& ensemble, const Perturbation<Space>& f,
                     const ChainState<Space>& initial, double t, std::int64_t n);

/// Exact pair (direct killed functional with the n+p sum, window-averaged
/// chain functional); equal to rounding.
template <typename Space>
std::pair<double, double> exact_disintegration_sides(const Space& space, const Ensemble& ensemble,
                                                     const Perturbation<Space>& f, std::int64_t p,
                                                     const typename Space::Point& start, double t,
                                                     std::int64_t n);

// --- implementation of the templated oracles ---

namespace oracle_detail {

void check_guard(std::size_t k, std::int64_t n);

/// Odometer over index tuples of length n with k symbols.
template <typename Fn>
void for_each_tuple(std::size_t k, std::int64_t n, Fn&& fn)
{
    std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
    for (;;) {
        fn(const_cast<const std::vector<std::size_t>&>(idx));
        std::int64_t pos = n - 1;
        while (pos >= 0) {
            if (++idx[static_cast<std::size_t>(pos)] < k) {
                break;
            }
            idx[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) {
            return;
        }
    }
}

} // namespace oracle_detail

template <typename Space>
double exact_U(const Space& space, const Ensemble& ensemble, const Perturbation<Space>& f,
               const TwistFunction& theta, const typename Space::Point& start, double t,
               std::int64_t n)
{
    if (!ensemble.is_discrete()) {
        throw_error(ErrorKind::ConfigError, "oracle requires a finite-support ensemble");
    }
    const auto& atoms = ensemble.atoms();
    const auto& weights = ensemble.weights();
    const std::int64_t total = std::max(n + f.horizon, theta.lookahead);
    oracle_detail::check_guard(atoms.size(), total);

    RngStream dummy(0, 0);
    KahanSum acc;
    std::vector<GroupElement> letters(static_cast<std::size_t>(total), atoms[0]);
    oracle_detail::for_each_tuple(atoms.size(), total, [&](const std::vector<std::size_t>& idx) {
        double prob = 1.0;
        for (std::size_t j = 0; j < idx.size(); ++j) {
            letters[j] = atoms[idx[j]];
            prob *= weights[idx[j]];
        }
        const std::span<const GroupElement> all(letters);
        typename Space::Point x = start;
        const double f0 = f(0, all.subspan(0, static_cast<std::size_t>(f.horizon)), x, dummy);
        double sum = 0.0;
        bool alive = true;
        double tilde_n = 0.0;
        for (std::int64_t k = 1; k <= n; ++k) {
            const GroupElement& g = letters[static_cast<std::size_t>(k - 1)];
            sum += space.increment(g, x);
            x = space.apply(g, x);
            const double fk =
                f(k, all.subspan(static_cast<std::size_t>(k), static_cast<std::size_t>(f.horizon)), x, dummy);
            const double tilde = sum + fk - f0;
            if (t + tilde < 0.0) {
                alive = false;
                break;
            }
            if (k == n) {
                tilde_n = tilde;
            }
        }
        if (alive) {
            const double tw = theta(all.first(static_cast<std::size_t>(theta.lookahead)));
            acc.add(prob * (t + tilde_n) * tw);
        }
    });
    return acc.value();
}

template <typename Space>
double exact_W_chain(const Space& space, const Ensemble& ensemble, const Perturbation<Space>& f,
                     const ChainState<Space>& initial, double t, std::int64_t n)
{
    if (!ensemble.is_discrete()) {
        throw_error(ErrorKind::ConfigError, "oracle requires a finite-support ensemble");
    }
    const std::int64_t p = static_cast<std::int64_t>(initial.letters.size()) - 1;
    if (f.horizon > p) {
        throw_error(ErrorKind::ConfigError, "chain form requires a window-measurable perturbation");
    }
    const auto& atoms = ensemble.atoms();
    const auto& weights = ensemble.weights();
    oracle_detail::check_guard(atoms.size(), n + p);

    RngStream dummy(0, 0);
    KahanSum acc;
    oracle_detail::for_each_tuple(atoms.size(), n + p, [&](const std::vector<std::size_t>& idx) {
        double prob = 1.0;
        for (std::size_t j = 0; j < idx.size(); ++j) {
            prob *= weights[idx[j]];
        }
        ChainState<Space> state = initial;
        const double f_init = chain_perturbation(f, state, dummy);
        double sum = 0.0;
        bool alive = true;
        std::size_t fresh = 0;
        for (std::int64_t k = 1; k <= n + p; ++k) {
            ChainState<Space> next{state.letters, state.point, state.counter + 1};
            for (std::size_t j = 0; j + 1 < next.letters.size(); ++j) {
                next.letters[j] = next.letters[j + 1];
            }
            next.letters.back() = atoms[idx[fresh++]];
            next.point = space.apply(next.letters.front(), state.point);
            sum += space.increment(next.letters.front(), state.point);
            state = std::move(next);
            if (alive && k <= n) {
                const double fk = chain_perturbation(f, state, dummy);
                if (t + sum + fk - f_init < 0.0) {
                    alive = false;
                }
            }
        }
        if (alive) {
            acc.add(prob * (t + sum));
        }
    });
    return acc.value();
}

template <typename Space>
std::pair<double, double> exact_disintegration_sides(const Space& space, const Ensemble& ensemble,
                                                     const Perturbation<Space>& f, std::int64_t p,
                                                     const typename Space::Point& start, double t,
                                                     std::int64_t n)
{
    if (!ensemble.is_discrete()) {
        throw_error(ErrorKind::ConfigError, "oracle requires a finite-support ensemble");
    }
    const auto& atoms = ensemble.atoms();
    const auto& weights = ensemble.weights();
    oracle_detail::check_guard(atoms.size(), n + p);

    // Direct side: E(t + S_{n+p}; tau^f > n) from the fixed start.
    RngStream dummy(0, 0);
    KahanSum direct;
    std::vector<GroupElement> letters(static_cast<std::size_t>(n + p + f.horizon), atoms[0]);
    oracle_detail::for_each_tuple(atoms.size(), n + p, [&](const std::vector<std::size_t>& idx) {
        double prob = 1.0;
        for (std::size_t j = 0; j < idx.size(); ++j) {
            letters[j] = atoms[idx[j]];
            prob *= weights[idx[j]];
        }
        const std::span<const GroupElement> all(letters);
        typename Space::Point x = start;
        const double f0 = f(0, all.subspan(0, static_cast<std::size_t>(f.horizon)), x, dummy);
        double sum = 0.0;
        bool alive = true;
        for (std::int64_t k = 1; k <= n + p; ++k) {
            const GroupElement& g = letters[static_cast<std::size_t>(k - 1)];
            sum += space.increment(g, x);
            x = space.apply(g, x);
            if (alive && k <= n) {
                const double fk = f(
                    k, all.subspan(static_cast<std::size_t>(k), static_cast<std::size_t>(f.horizon)), x, dummy);
                if (t + sum + fk - f0 < 0.0) {
                    alive = false;
                }
            }
        }
        if (alive) {
            direct.add(prob * (t + sum));
        }
    });

    // Chain side: average W_n over the window letters (the dropped leading
    // letter integrates out, so only g_1..g_p need enumeration).
    KahanSum chain;
    oracle_detail::check_guard(atoms.size(), p);
    oracle_detail::for_each_tuple(atoms.size(), p, [&](const std::vector<std::size_t>& win) {
        double wprob = 1.0;
        ChainState<Space> a{{}, start, 0};
        a.letters.reserve(static_cast<std::size_t>(p) + 1);
        a.letters.push_back(atoms[0]); // leading letter: never read
        for (std::size_t j = 0; j < win.size(); ++j) {
            a.letters.push_back(atoms[win[j]]);
            wprob *= weights[win[j]];
        }
        chain.add(wprob * exact_W_chain(space, ensemble, f, a, t, n));
    });
    return {direct.value(), chain.value()};
}

} // namespace linwalk
