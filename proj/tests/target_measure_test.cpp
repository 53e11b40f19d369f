// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "linwalk/exact_oracle.hpp"
#include "linwalk/target_measure.hpp"

using namespace linwalk;
using namespace linwalk::fixtures;

namespace {

TestFunction tent_h(double lo, double hi)
{
    return TestFunction{PhiFunction::one(), PiecewiseLinear::tent(lo, hi)};
}

double trapezoid(const std::function<double(double)>& f, double lo, double hi, int cells)
{
    double acc = 0.0;
    const double h = (hi - lo) / cells;
    for (int i = 0; i < cells; ++i) {
        const double a = lo + i * h;
        acc += 0.5 * (f(a) + f(a + h)) * h;
    }
    return acc;
}

} // namespace

TEST_CASE("identity ensemble: the action is the initial measure, exactly")
{
    const Ensemble id = identity_ensemble(2);
    const ProjPoint x = ProjPoint::axis(2, 0);
    const TestFunction h = tent_h(1.0, 3.0);
    const WeightedEstimate est = estimate_rho_action(id, x, 5, 300, h, Direction::Plus, 1);
    // phi = 1 and int_0^inf t psi(t) dt = centroid of the unit-mass tent.
    CHECK(est.value == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(est.stderr_ < 1e-12);
}

TEST_CASE("rho action matches enumeration on the 2d fixture")
{
    const Ensemble e = oracle_2d();
    const ProjPoint x = ProjPoint::axis(2, 0);
    Vector u(2);
    u << 1, 1;
    const TestFunction h{PhiFunction::overlap(u), PiecewiseLinear::tent(0.5, 2.5)};
    for (std::int64_t n : {1, 2, 4, 5}) {
        const double exact = exact_rho_action(e, x, n, h);
        int hits = 0;
        for (std::uint64_t s = 0; s < 10; ++s) {
            const WeightedEstimate mc = estimate_rho_action(e, x, n, 20000, h, Direction::Plus, 500 + s);
            if (std::abs(mc.value - exact) <= 4.0 * mc.stderr_) {
                ++hits;
            }
        }
        CHECK(hits >= 9);
    }
}

TEST_CASE("one-step action against a direct quadrature oracle")
{
    const Ensemble e = oracle_2d();
    const ProjPoint x = ProjPoint::axis(2, 0);
    const TestFunction h = tent_h(10.0, 11.0);
    // E int_0^inf t psi(t + sigma(g, x)) dt expanded over the two atoms.
    double reference = 0.0;
    for (std::size_t j = 0; j < e.atoms().size(); ++j) {
        const double sigma = cocycle(e.atoms()[j], x);
        reference += e.weights()[j] *
                     trapezoid([&](double t) { return t * h.psi(t + sigma); }, 0.0, 12.0, 400000);
    }
    const double exact = exact_rho_action(e, x, 1, h);
    CHECK(exact == doctest::Approx(reference).epsilon(1e-6));
    const WeightedEstimate mc = estimate_rho_action(e, x, 1, 20000, h, Direction::Plus, 3);
    CHECK(std::abs(mc.value - exact) <= 4.0 * mc.stderr_);
}

TEST_CASE("density: identity ensemble gives the ramp, estimates never decrease")
{
    const Ensemble id = identity_ensemble(2);
    const ProjPoint x = ProjPoint::axis(2, 0);
    const std::vector<double> grid{-1.0, 0.0, 0.5, 1.0, 2.0, 5.0};
    const auto rows = density_W(id, x, 3, 200, grid, Direction::Plus, 1);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(rows[i].w == doctest::Approx(std::max(grid[i], 0.0)).epsilon(1e-12));
    }

    const Ensemble e = center(proximal_pair_2d(), 1e-3, 5, 4000, 64);
    std::vector<double> fine;
    for (int i = 0; i <= 200; ++i) {
        fine.push_back(-10.0 + 0.15 * i);
    }
    const auto dens = density_W(e, ProjPoint::axis(2, 0), 50, 4000, fine, Direction::Plus, 7);
    for (std::size_t i = 1; i < dens.size(); ++i) {
        CHECK(dens[i].w >= dens[i - 1].w);
    }
}

TEST_CASE("harmonicity residual: identity exact zero, fixture within error bars")
{
    const Ensemble id = identity_ensemble(2);
    const ProjPoint x = ProjPoint::axis(2, 0);
    const TestFunction h = tent_h(0.5, 2.0);
    const WeightedEstimate idr = harmonicity_residual(id, x, 4, 400, h, 4, Direction::Plus, 1);
    CHECK(std::abs(idr.value) < 1e-12);

    const double oracle = exact_harmonicity_residual(oracle_2d(), x, 3, h);
    CHECK(std::abs(oracle) < 1e-10);

    int hits = 0;
    for (std::uint64_t s = 0; s < 12; ++s) {
        const WeightedEstimate mc =
            harmonicity_residual(oracle_2d(), x, 3, 20000, h, 8, Direction::Plus, 600 + s);
        if (std::abs(mc.value) <= 3.0 * mc.stderr_) {
            ++hits;
        }
    }
    CHECK(hits >= 10);
}

TEST_CASE("reversal residual: identity exact, fixture pooled within error bars")
{
    const Ensemble id = identity_ensemble(2);
    const ProjPoint x = ProjPoint::axis(2, 0);
    const TestFunction h = tent_h(0.5, 2.0);
    const ReversalReport idr = reversal_residual(id, x, 4, 200, 4, h, 1);
    CHECK(std::abs(idr.pooled.value) < 1e-12);
    // eta_x(h) on both sides.
    CHECK(idr.lhs_mean == doctest::Approx(h.psi.tails(0.0).first).epsilon(1e-12));

    const Ensemble e = center(proximal_pair_2d(), 1e-3, 5, 4000, 64);
    const ReversalReport rep = reversal_residual(e, x, 10, 4000, 8, h, 2);
    CHECK(std::abs(rep.pooled.value) <= 3.0 * rep.pooled.stderr_);
    CHECK(rep.rejected_y == 0);
}

TEST_CASE("translation: identity ensemble ratio approaches the psi integral")
{
    const Ensemble id = identity_ensemble(2);
    const ProjPoint x = ProjPoint::axis(2, 0);
    const TestFunction h = tent_h(-1.0, 1.0);
    const auto rows = translation_profile(id, x, 2, 200, h, {5.0, 20.0, 80.0}, 1, 200);
    // (1/t) int_0^inf u psi(u - t) du -> int psi = 1; identity paths make the
    // estimate deterministic: value (1/t) int (w + t) psi(w) dw = 1 + c/t.
    CHECK(rows[0].ratio == doctest::Approx(1.0).epsilon(0.05));
    CHECK(rows[2].ratio == doctest::Approx(1.0).epsilon(0.005));
    CHECK(rows[2].prediction == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("translation predictions are reproducible across independent runs")
{
    const Ensemble e = center(proximal_pair_2d(), 1e-3, 5, 4000, 64);
    Vector u(2);
    u << 1, 0;
    const TestFunction h{PhiFunction::overlap(u), PiecewiseLinear::tent(-1.0, 1.0)};
    const auto a = translation_profile(e, ProjPoint::axis(2, 0), 50, 500, h, {10.0}, 31, 20000);
    const auto b = translation_profile(e, ProjPoint::axis(2, 0), 50, 500, h, {10.0}, 32, 20000);
    CHECK(std::abs(a[0].prediction - b[0].prediction) <=
          3.0 * (a[0].prediction_stderr + b[0].prediction_stderr));
}

TEST_CASE("negative tail: identity has none, scalar walk has some")
{
    const NegativeTailReport id =
        negative_tail_report(identity_ensemble(2), ProjPoint::axis(2, 0), 5, 300, Direction::Plus, 1);
    CHECK(id.mass == 0.0);

    const NegativeTailReport sc = negative_tail_report(scalar_pm_log2(), ProjPoint::axis(1, 0), 100,
                                                       20000, Direction::Plus, 2);
    CHECK(sc.mass - 1.645 * sc.mass_stderr > 0.0);
}

TEST_CASE("cllt ratio rows are finite and well-posed")
{
    const Ensemble e = scalar_pm_log2();
    const ProjPoint x = ProjPoint::axis(1, 0);
    const TestFunction h = tent_h(-1.0, 2.0);
    ClltReferences refs;
    refs.v_hat = estimate_V(e, x, 1.0, 256, 20000, Direction::Plus, 5).value;
    refs.upsilon_sq = std::log(2.0) * std::log(2.0);
    refs.rho_h = estimate_rho_action(e, x, 256, 20000, h, Direction::Plus, 6).value;
    const ClltReport rep = cllt_ratio(e, x, 1.0, {32, 64, 128}, 20000, h, refs, 7);
    for (const auto& row : rep.rows) {
        CHECK(std::isfinite(row.ratio));
        CHECK(row.stderr_ >= 0.0);
    }
}

TEST_CASE("rho action is exactly linear and positive on shared paths")
{
    const Ensemble e = oracle_2d();
    const ProjPoint x = ProjPoint::axis(2, 0);
    const TestFunction h1{PhiFunction::one(), PiecewiseLinear::tent(0.0, 2.0)};
    const TestFunction h2{PhiFunction::one(), PiecewiseLinear::tent(1.0, 3.0)};
    const TestFunction hsum{PhiFunction::one(),
                            PiecewiseLinear({0.0, 1.0, 1.5, 2.0, 3.0}, {0.0, 1.0, 1.0, 1.0, 0.0})};
    // Same seed -> same paths -> the identity holds to rounding, not just
    // statistically.
    const std::uint64_t seed = 424242;
    const double a = estimate_rho_action(e, x, 4, 2000, h1, Direction::Plus, seed).value;
    const double b = estimate_rho_action(e, x, 4, 2000, h2, Direction::Plus, seed).value;
    const double ab = estimate_rho_action(e, x, 4, 2000, hsum, Direction::Plus, seed).value;
    CHECK(ab == doctest::Approx(a + b).epsilon(1e-12));
    CHECK(a >= 0.0);
    CHECK(b >= 0.0);
}

TEST_CASE("negative tail mass is stable across horizons")
{
    const Ensemble e = scalar_pm_log2();
    const ProjPoint x = ProjPoint::axis(1, 0);
    const NegativeTailReport a = negative_tail_report(e, x, 100, 40000, Direction::Plus, 21);
    const NegativeTailReport b = negative_tail_report(e, x, 200, 40000, Direction::Plus, 22);
    const NegativeTailReport c = negative_tail_report(e, x, 400, 40000, Direction::Plus, 23);
    CHECK(std::abs(a.mass - b.mass) < 3.0 * (a.mass_stderr + b.mass_stderr));
    CHECK(std::abs(b.mass - c.mass) < 3.0 * (b.mass_stderr + c.mass_stderr));
}

TEST_CASE("reversal residual on a continuous ensemble")
{
    const Ensemble e = center(rotation_diag_2d(), 1e-3, 5, 4000, 64);
    const TestFunction h{PhiFunction::one(), PiecewiseLinear::tent(0.5, 2.0)};
    const ReversalReport rep = reversal_residual(e, ProjPoint::axis(2, 0), 10, 3000, 8, h, 77);
    CHECK(std::abs(rep.pooled.value) <= 3.0 * rep.pooled.stderr_);
}

TEST_CASE("killed mean approaches the level for large t")
{
    const Ensemble e = center(proximal_pair_2d(), 1e-3, 5, 4000, 64);
    const WeightedEstimate v = estimate_V(e, ProjPoint::axis(2, 0), 50.0, 200, 20000,
                                          Direction::Plus, 31);
    CHECK(v.value / 50.0 > 0.9);
    CHECK(v.value / 50.0 < 1.1);
}

TEST_CASE("minus-direction action matches enumeration")
{
    const Ensemble e = oracle_2d();
    const ProjPoint x = ProjPoint::axis(2, 0);
    const TestFunction h{PhiFunction::one(), PiecewiseLinear::tent(0.5, 2.5)};
    const double exact = exact_rho_action(e, x, 4, h, Direction::Minus);
    int hits = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const WeightedEstimate mc =
            estimate_rho_action(e, x, 4, 20000, h, Direction::Minus, 900 + s);
        if (std::abs(mc.value - exact) <= 4.0 * mc.stderr_) {
            ++hits;
        }
    }
    CHECK(hits >= 9);
}

TEST_CASE("cllt diagnostic stays well-posed on a matrix ensemble")
{
    const Ensemble e = center(proximal_pair_2d(), 1e-3, 5, 4000, 64);
    const ProjPoint x = ProjPoint::axis(2, 0);
    const TestFunction h{PhiFunction::one(), PiecewiseLinear::tent(0.0, 10.0)};
    ClltReferences refs;
    const VarianceEstimate var = estimate_variance(e, x, 128, 20000, 61);
    refs.upsilon_sq = var.upsilon_sq;
    refs.v_hat = estimate_V(e, x, 1.0, 256, 20000, Direction::Plus, 62).value;
    refs.rho_h = estimate_rho_action(e, x, 256, 20000, h, Direction::Plus, 63).value;
    const ClltReport rep = cllt_ratio(e, x, 1.0, {32, 64, 128}, 20000, h, refs, 64);
    for (const auto& row : rep.rows) {
        CHECK(std::isfinite(row.ratio));
        CHECK(row.ratio > 0.0);
    }
}
