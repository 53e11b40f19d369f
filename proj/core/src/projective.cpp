// SPDX-License-Identifier: Apache-2.0
#include "linwalk/projective.hpp"

#include <cmath>

namespace linwalk {

namespace detail {

Vector canonicalize(const Vector& v)
{
    const double norm = v.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw_error(ErrorKind::InvalidPoint, "zero or non-finite vector");
    }
    Vector u = v / norm;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        if (u[i] != 0.0) {
            if (u[i] < 0.0) {
                u = -u;
            }
            break;
        }
    }
    return u;
}

} // namespace detail

GroupElement GroupElement::from_matrix(const Matrix& m)
{
    if (m.rows() != m.cols() || m.rows() < 1) {
        throw_error(ErrorKind::DimensionError, "matrix must be square and non-empty");
    }
    auto impl = std::make_shared<Impl>();
    impl->mat = m;
    if (m.rows() == 1) {
        const double a = m(0, 0);
        if (a == 0.0 || !std::isfinite(a)) {
            throw_error(ErrorKind::IllConditioned, "scalar is zero or non-finite");
        }
        impl->inv = Matrix::Constant(1, 1, 1.0 / a);
        impl->log_norm = std::log(std::abs(a));
        impl->log_norm_inv = -impl->log_norm;
        return GroupElement(std::move(impl));
    }
    Eigen::PartialPivLU<Matrix> lu(m);
    impl->inv = lu.inverse();
    const double cond = m.norm() * impl->inv.norm();
    if (!std::isfinite(cond) || cond > 1e12) {
        throw_error(ErrorKind::IllConditioned, "condition estimate above 1e12");
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    impl->log_norm = std::log(svd.singularValues()(0));
    impl->log_norm_inv = -std::log(svd.singularValues()(m.rows() - 1));
    return GroupElement(std::move(impl));
}

GroupElement GroupElement::scaled(double c) const
{
    if (!(c > 0.0)) {
        throw_error(ErrorKind::InvalidPoint, "scale must be positive");
    }
    auto impl = std::make_shared<Impl>();
    impl->mat = c * impl_->mat;
    impl->inv = impl_->inv / c;
    impl->log_norm = impl_->log_norm + std::log(c);
    impl->log_norm_inv = impl_->log_norm_inv - std::log(c);
    return GroupElement(std::move(impl));
}

GroupElement GroupElement::inverted() const
{
    auto impl = std::make_shared<Impl>();
    impl->mat = impl_->inv;
    impl->inv = impl_->mat;
    impl->log_norm = impl_->log_norm_inv;
    impl->log_norm_inv = impl_->log_norm;
    return GroupElement(std::move(impl));
}

GroupElement GroupElement::identity(Eigen::Index dim)
{
    auto impl = std::make_shared<Impl>();
    impl->mat = Matrix::Identity(dim, dim);
    impl->inv = impl->mat;
    return GroupElement(std::move(impl));
}

ProjPoint normalize_point(const Vector& v)
{
    return ProjPoint(v);
}

DualProjPoint normalize_dual_point(const Vector& v)
{
    return DualProjPoint(v);
}

namespace {

void check_dim(const GroupElement& g, Eigen::Index point_dim)
{
    if (g.dim() != point_dim) {
        throw_error(ErrorKind::DimensionError, "group element and point dimensions differ");
    }
}

} // namespace

ProjPoint act(const GroupElement& g, const ProjPoint& x)
{
    check_dim(g, x.dim());
    return ProjPoint(g.mat() * x.coords());
}

DualProjPoint act(const GroupElement& g, const DualProjPoint& y)
{
    check_dim(g, y.dim());
    return DualProjPoint(g.inv().transpose() * y.coords());
}

double cocycle(const GroupElement& g, const ProjPoint& x)
{
    check_dim(g, x.dim());
    return std::log((g.mat() * x.coords()).norm());
}

double cocycle(const GroupElement& g, const DualProjPoint& y)
{
    check_dim(g, y.dim());
    return std::log((g.inv().transpose() * y.coords()).norm());
}

double delta(const ProjPoint& x, const DualProjPoint& y)
{
    if (x.dim() != y.dim()) {
        throw_error(ErrorKind::DimensionError, "point dimensions differ");
    }
    const double pairing = std::abs(y.coords().dot(x.coords()));
    if (pairing < kPairingUnderflow) {
        return std::numeric_limits<double>::infinity();
    }
    // Unit representatives can give |<phi,v>| marginally above 1 by rounding.
    return pairing >= 1.0 ? 0.0 : -std::log(pairing);
}

namespace {

// ||a ^ b|| for unit representatives, summed componentwise; unlike
// sqrt(1 - <a,b>^2) this resolves distances all the way down to rounding.
double sin_distance_impl(const Vector& a, const Vector& b)
{
    double sq = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        for (Eigen::Index j = i + 1; j < a.size(); ++j) {
            const double w = a[i] * b[j] - a[j] * b[i];
            sq += w * w;
        }
    }
    return std::min(std::sqrt(sq), 1.0);
}

} // namespace

double sin_distance(const ProjPoint& a, const ProjPoint& b)
{
    if (a.dim() != b.dim()) {
        throw_error(ErrorKind::DimensionError, "point dimensions differ");
    }
    return sin_distance_impl(a.coords(), b.coords());
}

double sin_distance(const DualProjPoint& a, const DualProjPoint& b)
{
    if (a.dim() != b.dim()) {
        throw_error(ErrorKind::DimensionError, "point dimensions differ");
    }
    return sin_distance_impl(a.coords(), b.coords());
}

double cohomology_residual(const GroupElement& g, const ProjPoint& x, const DualProjPoint& y)
{
    const GroupElement ginv = g.inverted();
    const double d_fwd = delta(act(g, x), y);
    const double d_bwd = delta(x, act(ginv, y));
    if (std::isinf(d_fwd) || std::isinf(d_bwd)) {
        throw_error(ErrorKind::InfiniteDelta, "cohomological brackets require finite delta");
    }
    const double lhs = cocycle(g, x) - d_fwd;
    const double rhs = cocycle(ginv, y) - d_bwd;
    return lhs - rhs;
}

} // namespace linwalk
