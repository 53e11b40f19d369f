// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <limits>
#include <memory>

#include "linwalk/errors.hpp"

namespace linwalk {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace detail {
/// Unit-norm, sign-canonical representative: first nonzero coordinate
/// positive. Throws InvalidPoint on the zero vector.
Vector canonicalize(const Vector& v);
} // namespace detail

/// Point of the projective space: stored as the canonical unit representative
/// of its line. Immutable; equality of points is equality of representatives.
class ProjPoint {
  public:
    explicit ProjPoint(const Vector& v) : coords_(detail::canonicalize(v)) {}

    const Vector& coords() const { return coords_; }
    Eigen::Index dim() const { return coords_.size(); }

    /// Canonical basis direction e_k.
    static ProjPoint axis(Eigen::Index dim, Eigen::Index k)
    {
        Vector v = Vector::Zero(dim);
        v[k] = 1.0;
        return ProjPoint(v);
    }

  private:
    Vector coords_;
};

/// Point of the dual projective space (lines of linear functionals), stored
/// the same way as ProjPoint. Kept as a distinct type so the two actions
/// cannot be mixed up.
class DualProjPoint {
  public:
    explicit DualProjPoint(const Vector& v) : coords_(detail::canonicalize(v)) {}

    const Vector& coords() const { return coords_; }
    Eigen::Index dim() const { return coords_.size(); }

    static DualProjPoint axis(Eigen::Index dim, Eigen::Index k)
    {
        Vector v = Vector::Zero(dim);
        v[k] = 1.0;
        return DualProjPoint(v);
    }

  private:
    Vector coords_;
};

/// Invertible matrix with its cached inverse and log operator norms.
///
/// The inverse is computed once by partial-pivot LU; a Frobenius condition
/// estimate above 1e12 raises IllConditioned. All dual-side operations reuse
/// the cached inverse transpose. The payload is immutable and shared, so
/// copies cost a reference bump; sampling loops hand elements around freely.
class GroupElement {
  public:
    static GroupElement from_matrix(const Matrix& m);

    /// The element c*m for c > 0; rescales the cached data in place of a
    /// fresh factorization.
    GroupElement scaled(double c) const;

    /// The inverse element, sharing the already-computed factors.
    GroupElement inverted() const;

    static GroupElement identity(Eigen::Index dim);

    const Matrix& mat() const { return impl_->mat; }
    const Matrix& inv() const { return impl_->inv; }
    Eigen::Index dim() const { return impl_->mat.rows(); }
    /// log of the operator (spectral) norm of mat.
    double log_norm() const { return impl_->log_norm; }
    /// log of the operator norm of the inverse.
    double log_norm_inv() const { return impl_->log_norm_inv; }

  private:
    struct Impl {
        Matrix mat;
        Matrix inv;
        double log_norm = 0.0;
        double log_norm_inv = 0.0;
    };

    explicit GroupElement(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

    std::shared_ptr<const Impl> impl_;
};

/// Allocation-free renormalized step for sampling loops:
/// v <- g v / ||g v|| using the caller's scratch vector; returns log ||g v||.
/// Dimensions one and two bypass Eigen's dynamic-product dispatch, which
/// dominates the walk cost otherwise.
inline double step_direction(const GroupElement& g, Vector& v, Vector& scratch)
{
    const Eigen::Index d = v.size();
    if (d == 1) {
        // The projective point is trivial; only the gain matters.
        return g.log_norm();
    }
    if (d == 2) {
        const Matrix& m = g.mat();
        const double a = m(0, 0) * v[0] + m(0, 1) * v[1];
        const double b = m(1, 0) * v[0] + m(1, 1) * v[1];
        const double norm = std::sqrt(a * a + b * b);
        v[0] = a / norm;
        v[1] = b / norm;
        return std::log(norm);
    }
    scratch.noalias() = g.mat() * v;
    const double norm = scratch.norm();
    v.swap(scratch);
    v /= norm;
    return std::log(norm);
}

/// Same for the transpose action driving the dual walk.
inline double step_direction_transpose(const GroupElement& g, Vector& v, Vector& scratch)
{
    const Eigen::Index d = v.size();
    if (d == 1) {
        return g.log_norm();
    }
    if (d == 2) {
        const Matrix& m = g.mat();
        const double a = m(0, 0) * v[0] + m(1, 0) * v[1];
        const double b = m(0, 1) * v[0] + m(1, 1) * v[1];
        const double norm = std::sqrt(a * a + b * b);
        v[0] = a / norm;
        v[1] = b / norm;
        return std::log(norm);
    }
    scratch.noalias() = g.mat().transpose() * v;
    const double norm = scratch.norm();
    v.swap(scratch);
    v /= norm;
    return std::log(norm);
}

/// Threshold below which the pairing |<phi, v>| of unit representatives is
/// treated as zero and delta reported infinite.
inline constexpr double kPairingUnderflow = 1e-300;

ProjPoint normalize_point(const Vector& v);
DualProjPoint normalize_dual_point(const Vector& v);

/// Primal action g(Rv) = R(gv).
ProjPoint act(const GroupElement& g, const ProjPoint& x);
/// Dual action (g phi)(v) = phi(g^{-1} v); matrix of the action is the
/// inverse transpose.
DualProjPoint act(const GroupElement& g, const DualProjPoint& y);

/// sigma(g, x) = log ||g v|| for the unit representative v of x.
double cocycle(const GroupElement& g, const ProjPoint& x);
/// sigma*(g, y) = log ||g^{-T} phi|| for the unit representative phi of y.
double cocycle(const GroupElement& g, const DualProjPoint& y);

/// delta(x, y) = -log |<phi, v>| >= 0 for unit representatives; returns
/// +infinity when the pairing vanishes (orthogonal pair). Infinity is a
/// valid value, not an error.
double delta(const ProjPoint& x, const DualProjPoint& y);

double sin_distance(const ProjPoint& a, const ProjPoint& b);
double sin_distance(const DualProjPoint& a, const DualProjPoint& b);

/// Residual of the cohomological identity
///   sigma(g, x) - delta(gx, y) = sigma*(g^{-1}, y) - delta(x, g^{-1} y);
/// mathematically zero whenever both brackets are finite. Throws
/// InfiniteDelta if either delta is infinite.
double cohomology_residual(const GroupElement& g, const ProjPoint& x, const DualProjPoint& y);

} // namespace linwalk
