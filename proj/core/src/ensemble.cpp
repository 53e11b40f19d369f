// SPDX-License-Identifier: Apache-2.0
#include "linwalk/ensemble.hpp"

#include <cmath>

namespace linwalk {

namespace {

Matrix haar_rotation(int dim, RngStream& rng)
{
    Matrix g(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            g(i, j) = rng.normal();
        }
    }
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < dim; ++j) {
        if (r(j, j) < 0.0) {
            q.col(j) = -q.col(j);
        }
    }
    return q;
}

} // namespace

Ensemble Ensemble::build(const EnsembleSpec& spec)
{
    if (spec.dim < 1) {
        throw_error(ErrorKind::ConfigError, "dimension must be >= 1");
    }
    if (!(spec.scale > 0.0)) {
        throw_error(ErrorKind::ConfigError, "scale must be positive");
    }
    Ensemble e;
    e.spec_ = spec;
    switch (spec.kind) {
        case EnsembleKind::Discrete: {
            if (spec.atoms.empty() || spec.atoms.size() != spec.weights.size()) {
                throw_error(ErrorKind::WeightError, "atoms and weights must be non-empty and equal-sized");
            }
            double total = 0.0;
            for (double w : spec.weights) {
                if (!(w >= 0.0)) {
                    throw_error(ErrorKind::WeightError, "negative weight");
                }
                total += w;
            }
            if (std::abs(total - 1.0) > 1e-12) {
                throw_error(ErrorKind::WeightError, "weights must sum to 1 within 1e-12");
            }
            double acc = 0.0;
            for (std::size_t i = 0; i < spec.atoms.size(); ++i) {
                if (spec.atoms[i].rows() != spec.dim || spec.atoms[i].cols() != spec.dim) {
                    throw_error(ErrorKind::DimensionError, "atom dimension mismatch");
                }
                try {
                    e.atoms_.push_back(GroupElement::from_matrix(spec.atoms[i]).scaled(spec.scale));
                } catch (const Error& err) {
                    if (err.kind() == ErrorKind::IllConditioned) {
                        throw_error(ErrorKind::SingularAtom, "atom failed inversion");
                    }
                    throw;
                }
                acc += spec.weights[i];
                e.cdf_.push_back(acc);
            }
            e.cdf_.back() = 1.0;
            break;
        }
        case EnsembleKind::RotationDiagonal: {
            if (spec.gains.size() != spec.dim) {
                throw_error(ErrorKind::ConfigError, "gains length must equal dim");
            }
            break;
        }
        case EnsembleKind::GaussianPerturbed: {
            if (spec.epsilon < 0.0) {
                throw_error(ErrorKind::ConfigError, "epsilon must be non-negative");
            }
            break;
        }
    }
    return e;
}

GroupElement Ensemble::draw(RngStream& rng) const
{
    switch (spec_.kind) {
        case EnsembleKind::Discrete:
            return atoms_[rng.pick(cdf_)];
        case EnsembleKind::RotationDiagonal: {
            const Matrix rot = haar_rotation(spec_.dim, rng);
            const Matrix g = rot * spec_.gains.array().exp().matrix().asDiagonal();
            return GroupElement::from_matrix(g).scaled(spec_.scale);
        }
        case EnsembleKind::GaussianPerturbed: {
            // Near-singular draws are rejected so the cached inverse stays
            // trustworthy; with epsilon below ~1 rejections are rare.
            for (int attempt = 0; attempt < 256; ++attempt) {
                Matrix g = Matrix::Identity(spec_.dim, spec_.dim);
                for (int i = 0; i < spec_.dim; ++i) {
                    for (int j = 0; j < spec_.dim; ++j) {
                        g(i, j) += spec_.epsilon * rng.normal();
                    }
                }
                try {
                    return GroupElement::from_matrix(g).scaled(spec_.scale);
                } catch (const Error& err) {
                    if (err.kind() != ErrorKind::IllConditioned) {
                        throw;
                    }
                }
            }
            throw_error(ErrorKind::IllConditioned, "persistent near-singular draws");
        }
    }
    throw_error(ErrorKind::ConfigError, "unknown ensemble kind");
}

GroupElement Ensemble::draw_inverse(RngStream& rng) const
{
    return draw(rng).inverted();
}

Ensemble Ensemble::rescaled(double c) const
{
    EnsembleSpec spec = spec_;
    spec.scale *= c;
    return build(spec);
}

LyapunovEstimate estimate_lyapunov(const Ensemble& ensemble, std::int64_t steps,
                                   std::int64_t replicas, std::uint64_t seed, unsigned workers)
{
    if (steps < 1 || replicas < 2) {
        throw_error(ErrorKind::ConfigError, "need steps >= 1 and replicas >= 2");
    }
    const ProjPoint x0 = ProjPoint::axis(ensemble.dim(), 0);
    std::vector<double> replica_means(static_cast<std::size_t>(replicas));
    mc::for_each_sample(replicas, seed, /*salt=*/0x11, workers, [&](std::int64_t r, RngStream& rng) {
        Vector v = x0.coords();
        Vector scratch(v.size());
        GroupElement storage = GroupElement::identity(v.size());
        double sum = 0.0;
        for (std::int64_t k = 0; k < steps; ++k) {
            sum += step_direction(ensemble.draw_ref(rng, storage), v, scratch);
        }
        replica_means[static_cast<std::size_t>(r)] = sum / static_cast<double>(steps);
    });
    const MeanStderr ms = mean_stderr(replica_means);
    return LyapunovEstimate{ms.mean, ms.stderr_, steps, replicas};
}

Ensemble center(const Ensemble& ensemble, double tolerance, std::uint64_t seed,
                std::int64_t steps, std::int64_t replicas, unsigned workers)
{
    if (!(tolerance > 0.0)) {
        throw_error(ErrorKind::ConfigError, "tolerance must be positive");
    }
    Ensemble current = ensemble;
    constexpr int kMaxRounds = 6;
    for (int round = 0; round < kMaxRounds; ++round) {
        const LyapunovEstimate est =
            estimate_lyapunov(current, steps, replicas, seed + static_cast<std::uint64_t>(round), workers);
        if (std::abs(est.lambda_hat) <= tolerance + 3.0 * est.stderr_ && round > 0) {
            return current;
        }
        // The scalar shift sigma(c g, x) = sigma(g, x) + log c moves the
        // exponent by exactly log c.
        current = current.rescaled(std::exp(-est.lambda_hat));
    }
    const LyapunovEstimate final_est = estimate_lyapunov(current, steps, replicas, seed + 99, workers);
    if (std::abs(final_est.lambda_hat) <= tolerance + 3.0 * final_est.stderr_) {
        return current;
    }
    throw_error(ErrorKind::NotConverged, "centering failed to reach tolerance");
}

ProjPoint sample_stationary(const Ensemble& ensemble, std::int64_t depth, RngStream& rng)
{
    if (depth < 1) {
        throw_error(ErrorKind::ConfigError, "depth must be >= 1");
    }
    Vector v = ProjPoint::axis(ensemble.dim(), 0).coords();
    Vector scratch(v.size());
    GroupElement storage = GroupElement::identity(v.size());
    for (std::int64_t k = 0; k < depth; ++k) {
        step_direction(ensemble.draw_ref(rng, storage), v, scratch);
    }
    return ProjPoint(v);
}

DualProjPoint sample_stationary_dual(const Ensemble& ensemble, std::int64_t depth, RngStream& rng)
{
    if (depth < 1) {
        throw_error(ErrorKind::ConfigError, "depth must be >= 1");
    }
    // nu* is stationary for the dual action of the inverse law; the matrix of
    // that action is the plain transpose.
    Vector phi = DualProjPoint::axis(ensemble.dim(), 0).coords();
    Vector scratch(phi.size());
    GroupElement storage = GroupElement::identity(phi.size());
    for (std::int64_t k = 0; k < depth; ++k) {
        step_direction_transpose(ensemble.draw_ref(rng, storage), phi, scratch);
    }
    return DualProjPoint(phi);
}

ProjPoint boundary_point(std::span<const GroupElement> prefix, const ProjPoint& x0)
{
    if (prefix.empty()) {
        throw_error(ErrorKind::ConfigError, "prefix must be non-empty");
    }
    Vector v = x0.coords();
    for (std::size_t i = prefix.size(); i > 0; --i) {
        v = prefix[i - 1].mat() * v;
        v /= v.norm();
    }
    return ProjPoint(v);
}

double equivariance_residual(std::span<const GroupElement> prefix_plus_one, const ProjPoint& x0)
{
    if (prefix_plus_one.size() < 2) {
        throw_error(ErrorKind::ConfigError, "need at least two letters");
    }
    const ProjPoint xi_l = boundary_point(prefix_plus_one.first(prefix_plus_one.size() - 1), x0);
    const ProjPoint xi_l1 = boundary_point(prefix_plus_one, x0);
    return sin_distance(xi_l, xi_l1);
}

ContractionProfile contraction_profile(const Ensemble& ensemble,
                                       const std::vector<std::int64_t>& n_list,
                                       std::int64_t pairs, double rate, std::uint64_t seed,
                                       unsigned workers)
{
    if (!(rate > 0.0)) {
        throw_error(ErrorKind::ConfigError, "rate must be positive");
    }
    if (pairs < 100) {
        throw_error(ErrorKind::ConfigError, "need at least 100 pairs");
    }
    std::int64_t n_max = 0;
    for (std::int64_t n : n_list) {
        n_max = std::max(n_max, n);
    }
    const std::size_t levels = n_list.size();
    std::vector<std::uint8_t> exceed(static_cast<std::size_t>(pairs) * levels, 0);
    if (ensemble.dim() < 2) {
        throw_error(ErrorKind::ConfigError, "contraction diagnostic needs dimension >= 2");
    }
    mc::for_each_sample(pairs, seed, /*salt=*/0x22, workers, [&](std::int64_t p, RngStream& rng) {
        // Maximally separated starting pair: a random direction and a random
        // direction orthogonal to it, so isometries keep the distance at 1.
        Vector a(ensemble.dim());
        for (int i = 0; i < ensemble.dim(); ++i) {
            a[i] = rng.normal();
        }
        a /= a.norm();
        Vector b(ensemble.dim());
        do {
            for (int i = 0; i < ensemble.dim(); ++i) {
                b[i] = rng.normal();
            }
            b -= a.dot(b) * a;
        } while (b.norm() < 1e-9);
        ProjPoint x(a);
        ProjPoint xp(b);
        std::size_t level = 0;
        for (std::int64_t k = 1; k <= n_max && level < levels; ++k) {
            const GroupElement g = ensemble.draw(rng);
            x = act(g, x);
            xp = act(g, xp);
            while (level < levels && n_list[level] == k) {
                const bool over = sin_distance(x, xp) > std::exp(-rate * static_cast<double>(k));
                exceed[static_cast<std::size_t>(p) * levels + level] = over ? 1 : 0;
                ++level;
            }
        }
    });
    ContractionProfile profile;
    profile.rate = rate;
    std::vector<double> log_n;
    std::vector<double> log_frac;
    for (std::size_t l = 0; l < levels; ++l) {
        std::size_t hits = 0;
        for (std::int64_t p = 0; p < pairs; ++p) {
            hits += exceed[static_cast<std::size_t>(p) * levels + l];
        }
        const MeanStderr ms = proportion_stderr(hits, static_cast<std::size_t>(pairs));
        profile.rows.push_back({n_list[l], ms.mean, ms.stderr_});
        if (ms.mean > 0.0) {
            log_n.push_back(static_cast<double>(n_list[l]));
            log_frac.push_back(std::log(ms.mean));
        }
    }
    if (log_n.size() >= 3) {
        const LinearFit fit = linear_fit(log_n, log_frac);
        profile.log_fraction_slope = fit.slope;
        profile.slope_stderr = fit.slope_stderr;
    }
    return profile;
}

double singular_gap_statistic(const Ensemble& ensemble, std::int64_t n, std::int64_t samples,
                              std::uint64_t seed)
{
    if (ensemble.dim() == 1) {
        return std::numeric_limits<double>::infinity();
    }
    KahanSum gap;
    for (std::int64_t s = 0; s < samples; ++s) {
        RngStream rng(seed, mix64(0x33) ^ static_cast<std::uint64_t>(s));
        Matrix prod = Matrix::Identity(ensemble.dim(), ensemble.dim());
        for (std::int64_t k = 0; k < n; ++k) {
            prod = ensemble.draw(rng).mat() * prod;
            prod /= prod.norm();
        }
        Eigen::JacobiSVD<Matrix> svd(prod);
        // Strongly proximal products are numerically rank one; clamp the
        // trailing singular value so the diagnostic saturates instead of
        // overflowing.
        const double tail = std::max(svd.singularValues()(1), 1e-300);
        gap.add(std::log(svd.singularValues()(0)) - std::log(tail));
    }
    return gap.value() / static_cast<double>(samples);
}

} // namespace linwalk
