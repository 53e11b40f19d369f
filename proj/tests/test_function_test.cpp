// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "linwalk/test_function.hpp"

using namespace linwalk;

namespace {

// Independent quadrature oracle: plain composite trapezoid on a fine grid.
double trapezoid(const std::function<double(double)>& f, double lo, double hi, int cells)
{
    double acc = 0.0;
    const double h = (hi - lo) / cells;
    for (int i = 0; i < cells; ++i) {
        const double a = lo + i * h;
        const double b = a + h;
        acc += 0.5 * (f(a) + f(b)) * h;
    }
    return acc;
}

} // namespace

TEST_CASE("piecewise linear evaluation and support")
{
    const PiecewiseLinear tent = PiecewiseLinear::tent(0.0, 2.0);
    CHECK(tent(-0.5) == 0.0);
    CHECK(tent(0.5) == doctest::Approx(0.5));
    CHECK(tent(1.0) == doctest::Approx(1.0));
    CHECK(tent(1.5) == doctest::Approx(0.5));
    CHECK(tent(2.5) == 0.0);
    CHECK_THROWS_AS(PiecewiseLinear({0.0, 0.0}, {0.0, 1.0}), Error);
}

TEST_CASE("tail integrals match the quadrature oracle")
{
    const PiecewiseLinear psi({-1.0, 0.5, 1.0, 3.0}, {0.0, 2.0, -1.0, 0.0});
    for (double a : {-5.0, -1.0, -0.3, 0.5, 0.9, 1.7, 2.999, 3.5}) {
        const auto tails = psi.tails(a);
        const double lo = std::max(a, -1.0);
        const double mass_ref = a >= 3.0 ? 0.0 : trapezoid([&](double u) { return psi(u); }, lo, 3.0, 300000);
        const double first_ref = a >= 3.0 ? 0.0 : trapezoid([&](double u) { return u * psi(u); }, lo, 3.0, 300000);
        CHECK(tails.mass == doctest::Approx(mass_ref).epsilon(1e-7));
        CHECK(tails.first == doctest::Approx(first_ref).epsilon(1e-7));
    }
}

TEST_CASE("weighted shifted tail agrees with direct quadrature")
{
    const PiecewiseLinear psi = PiecewiseLinear::tent(1.0, 3.0);
    for (double c : {0.0, 0.4, 2.0}) {
        for (double s : {-1.5, 0.0, 0.8}) {
            const double direct =
                trapezoid([&](double t) { return t * psi(t + s); }, c, 6.0, 400000);
            CHECK(psi.weighted_shifted_tail(c, s) == doctest::Approx(direct).epsilon(1e-6));
        }
    }
}

TEST_CASE("tent integral facts")
{
    const PiecewiseLinear tent = PiecewiseLinear::tent(1.0, 3.0);
    CHECK(tent.integral() == doctest::Approx(1.0));
    // Centroid of the symmetric tent sits at 2.
    CHECK(tent.tails(-10.0).first == doctest::Approx(2.0));
}

TEST_CASE("phi functions: values and reported Lipschitz data")
{
    const ProjPoint e1 = ProjPoint::axis(2, 0);
    const ProjPoint e2 = ProjPoint::axis(2, 1);
    const PhiFunction one = PhiFunction::one();
    CHECK(one(e1) == 1.0);
    CHECK(one.lipschitz() == 0.0);

    Vector u(2);
    u << 1, 0;
    const PhiFunction ov = PhiFunction::overlap(u);
    CHECK(ov(e1) == doctest::Approx(1.0));
    CHECK(ov(e2) == doctest::Approx(0.0));

    const PhiFunction dist = PhiFunction::distance_to(e1);
    CHECK(dist(e1) == doctest::Approx(0.0));
    CHECK(dist(e2) == doctest::Approx(1.0));
    CHECK(dist.lipschitz() == 1.0);
}
