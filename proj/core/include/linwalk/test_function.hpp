// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "linwalk/projective.hpp"

namespace linwalk {

/// Piecewise-linear function on R with compact support [knots.front(),
/// knots.back()]; zero outside. Tail integrals are closed-form, which is what
/// makes the t-integration of every measure estimator exact per path.
class PiecewiseLinear {
  public:
    PiecewiseLinear(std::vector<double> knots, std::vector<double> values);

    double operator()(double u) const;

    struct TailIntegrals {
        double mass = 0.0;     // int_a^inf psi(u) du
        double first = 0.0;    // int_a^inf u psi(u) du
    };

    /// Exact tails from a; integrated in knot-local coordinates so the
    /// result is accurate to ~1e-14 absolute even for supports around 1e2.
    TailIntegrals tails(double a) const;

    /// int_a^inf t psi(t + s) dt  ==  first(a+s) - s * mass(a+s).
    double weighted_shifted_tail(double a, double s) const
    {
        const TailIntegrals ti = tails(a + s);
        return ti.first - s * ti.mass;
    }

    double integral() const { return tails(knots_.front()).mass; }
    double support_min() const { return knots_.front(); }
    double support_max() const { return knots_.back(); }

    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& values() const { return values_; }

    /// Tent of height 1 on [lo, hi].
    static PiecewiseLinear tent(double lo, double hi);

  private:
    std::vector<double> knots_;
    std::vector<double> values_;
};

/// Lipschitz test functions on the projective space, restricted to a closed
/// set of shapes so configs can name them.
class PhiFunction {
  public:
    enum class Kind { One, Overlap, DistanceTo };

    static PhiFunction one();
    /// <u, v>^2 for the unit representative v (sign-invariant, Lipschitz 2).
    static PhiFunction overlap(const Vector& u);
    /// sin-distance to a reference direction (Lipschitz 1).
    static PhiFunction distance_to(const ProjPoint& ref);

    double operator()(const ProjPoint& x) const;
    double lipschitz() const { return lipschitz_; }
    Kind kind() const { return kind_; }
    std::string describe() const;

  private:
    PhiFunction() = default;
    Kind kind_ = Kind::One;
    Vector u_;
    double lipschitz_ = 0.0;
};

/// Product test function h(x, t) = phi(x) * psi(t).
struct TestFunction {
    PhiFunction phi;
    PiecewiseLinear psi;

    double operator()(const ProjPoint& x, double t) const { return phi(x) * psi(t); }
};

} // namespace linwalk
