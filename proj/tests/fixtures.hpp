// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "linwalk/ensemble.hpp"

namespace linwalk::fixtures {

inline Matrix mat1(double a)
{
    Matrix m(1, 1);
    m << a;
    return m;
}

inline Matrix mat2(double a, double b, double c, double d)
{
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

/// d = 1 atoms {2, 1/2}, equal weights: the centered +-log2 scalar walk.
inline Ensemble scalar_pm_log2()
{
    EnsembleSpec spec;
    spec.dim = 1;
    spec.kind = EnsembleKind::Discrete;
    spec.atoms = {mat1(2.0), mat1(0.5)};
    spec.weights = {0.5, 0.5};
    spec.name = "scalar-pm-log2";
    return Ensemble::build(spec);
}

inline Ensemble identity_ensemble(int dim)
{
    EnsembleSpec spec;
    spec.dim = dim;
    spec.kind = EnsembleKind::Discrete;
    spec.atoms = {Matrix::Identity(dim, dim)};
    spec.weights = {1.0};
    spec.name = "identity";
    return Ensemble::build(spec);
}

/// Proximal, strongly irreducible pair: a hyperbolic atom and a scaled
/// rotation whose angle moves the eigendirections around.
inline Ensemble proximal_pair_2d(double scale = 1.0)
{
    EnsembleSpec spec;
    spec.dim = 2;
    spec.kind = EnsembleKind::Discrete;
    spec.atoms = {mat2(2, 1, 1, 1), mat2(1, -1, 1, 1)};
    spec.weights = {0.5, 0.5};
    spec.scale = scale;
    spec.name = "proximal-pair-2d";
    return Ensemble::build(spec);
}

/// Symmetric law {A, A^{-1}} with A = [[2,1],[1,1]]. The two atoms commute,
/// so this walk is the simple random walk on the powers of A: a degenerate
/// fixture kept for the exponent-estimator test only.
inline Ensemble symmetric_powers_2d()
{
    EnsembleSpec spec;
    spec.dim = 2;
    spec.kind = EnsembleKind::Discrete;
    spec.atoms = {mat2(2, 1, 1, 1), mat2(1, -1, -1, 2)};
    spec.weights = {0.5, 0.5};
    spec.name = "symmetric-powers-2d";
    return Ensemble::build(spec);
}

/// Rational proximal pair for enumeration fixtures (distinct singular
/// values, no common invariant line union).
inline Ensemble oracle_2d(double scale = 1.0)
{
    EnsembleSpec spec;
    spec.dim = 2;
    spec.kind = EnsembleKind::Discrete;
    spec.atoms = {mat2(2, 1, 1, 1), mat2(1, 0, 1, 1)};
    spec.weights = {0.5, 0.5};
    spec.scale = scale;
    spec.name = "oracle-2d";
    return Ensemble::build(spec);
}

inline Ensemble oracle_3d(double scale = 1.0)
{
    Matrix a(3, 3);
    a << 2, 1, 0,
         1, 1, 1,
         0, 1, 1;
    Matrix b(3, 3);
    b << 1, 0, 1,
         0, 1, 1,
         1, 1, 0;
    EnsembleSpec spec;
    spec.dim = 3;
    spec.kind = EnsembleKind::Discrete;
    spec.atoms = {a, b};
    spec.weights = {0.5, 0.5};
    spec.scale = scale;
    spec.name = "oracle-3d";
    return Ensemble::build(spec);
}

inline Ensemble rotation_ensemble(int dim)
{
    EnsembleSpec spec;
    spec.dim = dim;
    spec.kind = EnsembleKind::RotationDiagonal;
    spec.gains = Vector::Zero(dim);
    spec.name = "rotation";
    return Ensemble::build(spec);
}

/// Continuous proximal ensemble: Haar rotation times diag(e^0.6, e^-0.6).
inline Ensemble rotation_diag_2d()
{
    EnsembleSpec spec;
    spec.dim = 2;
    spec.kind = EnsembleKind::RotationDiagonal;
    spec.gains = Vector(2);
    spec.gains << 0.6, -0.6;
    spec.name = "rotation-diag-2d";
    return Ensemble::build(spec);
}

inline Ensemble gaussian_ensemble(int dim, double epsilon)
{
    EnsembleSpec spec;
    spec.dim = dim;
    spec.kind = EnsembleKind::GaussianPerturbed;
    spec.epsilon = epsilon;
    spec.name = "gaussian";
    return Ensemble::build(spec);
}

} // namespace linwalk::fixtures
