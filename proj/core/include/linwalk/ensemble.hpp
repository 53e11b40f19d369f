// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "linwalk/estimate.hpp"
#include "linwalk/projective.hpp"
#include "linwalk/rng.hpp"

namespace linwalk {

enum class EnsembleKind {
    Discrete,         // finite support: atoms with probabilities
    RotationDiagonal, // Haar rotation times diag(exp(gains))
    GaussianPerturbed // identity plus epsilon * standard Gaussian entries
};

enum class Side { Primal, Dual };

/// Declarative description of the matrix law mu.
struct EnsembleSpec {
    int dim = 1;
    EnsembleKind kind = EnsembleKind::Discrete;
    std::vector<Matrix> atoms;
    std::vector<double> weights;
    Vector gains;          // RotationDiagonal: log singular gains, length dim
    double epsilon = 0.0;  // GaussianPerturbed: perturbation amplitude
    double scale = 1.0;    // positive multiplier applied to every sample
    std::string name;
};

/// Sampler for the matrix law. Immutable; draw() takes the caller's stream,
/// so one ensemble can serve any number of threads.
class Ensemble {
  public:
    static Ensemble build(const EnsembleSpec& spec);

    GroupElement draw(RngStream& rng) const;
    /// Sampler for the inverse law (elements g^{-1} for g ~ mu); what the
    /// dual stationary measure is built from.
    GroupElement draw_inverse(RngStream& rng) const;

    /// Copy-free draw for sampling loops: finite-support laws hand back a
    /// reference into the atom table; continuous laws materialize into the
    /// caller's storage.
    const GroupElement& draw_ref(RngStream& rng, GroupElement& storage) const
    {
        if (spec_.kind == EnsembleKind::Discrete) {
            return atoms_[rng.pick(cdf_)];
        }
        storage = draw(rng);
        return storage;
    }

    int dim() const { return spec_.dim; }
    double scale() const { return spec_.scale; }
    const EnsembleSpec& spec() const { return spec_; }

    bool is_discrete() const { return spec_.kind == EnsembleKind::Discrete; }
    /// Scaled atoms of a discrete ensemble (enumeration-ready).
    const std::vector<GroupElement>& atoms() const { return atoms_; }
    const std::vector<double>& weights() const { return spec_.weights; }

    /// Same law with the scale multiplied by c.
    Ensemble rescaled(double c) const;

  private:
    Ensemble() = default;

    EnsembleSpec spec_;
    std::vector<GroupElement> atoms_; // discrete only, scale applied
    std::vector<double> cdf_;         // discrete only
};

/// Estimate of the top Lyapunov exponent by renormalized replica averages:
/// mean over replicas of S_steps / steps from a fixed start direction.
LyapunovEstimate estimate_lyapunov(const Ensemble& ensemble, std::int64_t steps,
                                   std::int64_t replicas, std::uint64_t seed,
                                   unsigned workers = 1);

/// Returns the ensemble rescaled by exp(-lambda_hat), iterating until the
/// re-estimated exponent is within tolerance + 3 stderr of zero. Throws
/// NotConverged after a bounded number of refinement rounds.
Ensemble center(const Ensemble& ensemble, double tolerance, std::uint64_t seed,
                std::int64_t steps = 2000, std::int64_t replicas = 64, unsigned workers = 1);

/// Approximate draw from the stationary measure (primal: nu; dual: nu*,
/// stationary for the inverse law acting on the dual space). Depth-truncated;
/// accuracy governed by depth.
ProjPoint sample_stationary(const Ensemble& ensemble, std::int64_t depth, RngStream& rng);
DualProjPoint sample_stationary_dual(const Ensemble& ensemble, std::int64_t depth, RngStream& rng);

/// Default burn-in depth for stationary samplers (d <= 4 heuristics; the
/// stationarity self-consistency test validates it per ensemble).
inline constexpr std::int64_t kDefaultStationaryDepth = 50;

/// Truncated Furstenberg boundary point: prefix[0] ... prefix[L-1] applied to
/// x0 (letters applied right to left).
ProjPoint boundary_point(std::span<const GroupElement> prefix, const ProjPoint& x0);

/// d( g1...gL x0 , g1...g(L+1) x0 ): how far one extra letter moves the
/// truncated boundary point.
double equivariance_residual(std::span<const GroupElement> prefix_plus_one, const ProjPoint& x0);

struct ContractionRow {
    std::int64_t n = 0;
    double exceed_fraction = 0.0; // fraction of pairs with d > exp(-a n)
    double stderr_ = 0.0;
};

struct ContractionProfile {
    std::vector<ContractionRow> rows;
    double log_fraction_slope = 0.0; // fitted on rows with fraction > 0
    double slope_stderr = 0.0;
    double rate = 0.0; // the `a` used in the exceedance threshold
};

/// Proximality diagnostic: empirical exceedance fractions
/// P( d(g_n...g_1 x, g_n...g_1 x') > exp(-a n) ) over random pairs.
ContractionProfile contraction_profile(const Ensemble& ensemble,
                                       const std::vector<std::int64_t>& n_list,
                                       std::int64_t pairs, double rate, std::uint64_t seed,
                                       unsigned workers = 1);

/// Mean top-two singular value log-gap of products of length n; near zero
/// signals a violated proximality assumption.
double singular_gap_statistic(const Ensemble& ensemble, std::int64_t n, std::int64_t samples,
                              std::uint64_t seed);

} // namespace linwalk
