// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "linwalk/exact_oracle.hpp"
#include "linwalk/harmonic.hpp"

using namespace linwalk;
using namespace linwalk::fixtures;

TEST_CASE("identity ensemble: V is the positive part of t with zero spread")
{
    const Ensemble id = identity_ensemble(2);
    const ProjPoint x = ProjPoint::axis(2, 0);
    const WeightedEstimate pos = estimate_V(id, x, 1.5, 4, 500, Direction::Plus, 1);
    CHECK(pos.value == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(pos.stderr_ < 1e-12);
    const WeightedEstimate neg = estimate_V(id, x, -0.5, 4, 500, Direction::Plus, 1);
    CHECK(neg.value == 0.0);
}

TEST_CASE("scalar walk V_2(0) equals the four-path enumeration value")
{
    // Hand enumeration: only (+,+) survives with value 2 log 2, so
    // V_2(0) = (1/4) 2 log 2 = (1/2) log 2.
    const double expected = 0.5 * std::log(2.0);
    const Ensemble e = scalar_pm_log2();
    const ProjPoint x = ProjPoint::axis(1, 0);
    CHECK(exact_V(e, x, 0.0, 2) == doctest::Approx(expected).epsilon(1e-12));
    const WeightedEstimate mc = estimate_V(e, x, 0.0, 2, 40000, Direction::Plus, 77);
    CHECK(std::abs(mc.value - expected) < 3.0 * mc.stderr_);
}

TEST_CASE("V estimates agree with enumeration across small horizons")
{
    const Ensemble e = oracle_2d();
    const ProjPoint x = ProjPoint::axis(2, 0);
    for (std::int64_t n : {1, 3, 5}) {
        const double exact = exact_V(e, x, 0.7, n);
        int hits = 0;
        for (std::uint64_t s = 0; s < 10; ++s) {
            const WeightedEstimate mc = estimate_V(e, x, 0.7, n, 20000, Direction::Plus, 1000 + s);
            if (std::abs(mc.value - exact) <= 4.0 * mc.stderr_) {
                ++hits;
            }
        }
        CHECK(hits >= 9);
    }
}

TEST_CASE("V grid on shared paths: monotone in n and above the positive part")
{
    const Ensemble e = center(proximal_pair_2d(), 1e-3, 5, 4000, 64);
    const ProjPoint x = ProjPoint::axis(2, 0);
    const std::vector<std::int64_t> ns{4, 8, 16, 32};
    const std::vector<double> ts{-1.0, 0.0, 1.0, 5.0};
    const VGrid grid = estimate_V_grid(e, x, ns, ts, 20000, Direction::Plus, 99);
    for (std::size_t it = 0; it < ts.size(); ++it) {
        for (std::size_t a = 0; a < ns.size(); ++a) {
            const WeightedEstimate& va = grid.estimates[a][it];
            CHECK(va.value >= std::max(ts[it], 0.0) - 3.0 * va.stderr_);
            for (std::size_t b = a + 1; b < ns.size(); ++b) {
                const WeightedEstimate& vb = grid.estimates[b][it];
                CHECK(va.value <= vb.value + 3.0 * (va.stderr_ + vb.stderr_));
            }
        }
    }
}

TEST_CASE("minus direction matches the reflected scalar walk")
{
    // For the symmetric +-log2 law the plus and minus harmonic estimates
    // coincide in distribution.
    const Ensemble e = scalar_pm_log2();
    const ProjPoint x = ProjPoint::axis(1, 0);
    const WeightedEstimate plus = estimate_V(e, x, 1.0, 16, 40000, Direction::Plus, 12);
    const WeightedEstimate minus = estimate_V(e, x, 1.0, 16, 40000, Direction::Minus, 13);
    CHECK(std::abs(plus.value - minus.value) < 3.0 * (plus.stderr_ + minus.stderr_));
}

TEST_CASE("variance: rotations are degenerate, scalar walk gives log^2 2")
{
    const VarianceEstimate rot = estimate_variance(rotation_ensemble(2), ProjPoint::axis(2, 0), 50, 500, 3);
    CHECK(rot.degenerate);
    CHECK(rot.upsilon_sq < 1e-12);

    const VarianceEstimate sc =
        estimate_variance(scalar_pm_log2(), ProjPoint::axis(1, 0), 64, 40000, 4);
    CHECK(!sc.degenerate);
    CHECK(std::abs(sc.upsilon_sq - std::log(2.0) * std::log(2.0)) < 3.0 * sc.stderr_);
}

TEST_CASE("variance estimates at n and 2n are consistent")
{
    const Ensemble e = center(proximal_pair_2d(), 1e-3, 5, 4000, 64);
    const ProjPoint x = ProjPoint::axis(2, 0);
    const VarianceEstimate a = estimate_variance(e, x, 64, 30000, 21);
    const VarianceEstimate b = estimate_variance(e, x, 128, 30000, 22);
    CHECK(std::abs(a.upsilon_sq - b.upsilon_sq) < 3.0 * (a.stderr_ + b.stderr_));
}

TEST_CASE("survival: identity stays alive, scalar walk decays like a square root")
{
    const SurvivalCurve id =
        survival_curve(identity_ensemble(2), ProjPoint::axis(2, 0), 0.5, {1, 4, 16}, 2000, 5);
    for (const auto& row : id.rows) {
        CHECK(row.survival == 1.0);
    }

    const SurvivalCurve sc = survival_curve(scalar_pm_log2(), ProjPoint::axis(1, 0), 0.0,
                                            {32, 64, 128, 256, 512}, 60000, 6);
    // Monotone by construction (nested events on shared paths).
    for (std::size_t i = 1; i < sc.rows.size(); ++i) {
        CHECK(sc.rows[i].survival <= sc.rows[i - 1].survival);
    }
    CHECK(sc.loglog_slope > -0.65);
    CHECK(sc.loglog_slope < -0.38);
}

TEST_CASE("uniformity sweep: flat for the identity law, tight for a proximal one")
{
    const UniformitySweep flat =
        v_uniformity_sweep(identity_ensemble(2), 1.5, 4, 500, 4, Direction::Plus, 3);
    CHECK(flat.max_spread < 1e-12);

    // The limit function depends on the start; what is uniform across starts
    // is the large-t normalization V(x, t)/t -> 1. The sweep exposes both:
    // the per-x profile and, at a high level, a tight relative spread.
    const Ensemble e = center(proximal_pair_2d(), 1e-3, 5, 4000, 64);
    const UniformitySweep high = v_uniformity_sweep(e, 30.0, 128, 20000, 4, Direction::Plus, 4);
    for (const WeightedEstimate& est : high.estimates) {
        CHECK(est.value / 30.0 > 0.9);
        CHECK(est.value / 30.0 < 1.1);
    }
    CHECK(high.max_spread / 30.0 < 0.1);
}
