// SPDX-License-Identifier: Apache-2.0
#include "linwalk/perturbed.hpp"

namespace linwalk {

Perturbation<DualSpace> ideal_delta_perturbation(std::int64_t depth, const ProjPoint& x0)
{
    if (depth < 1) {
        throw_error(ErrorKind::ConfigError, "depth must be >= 1");
    }
    Perturbation<DualSpace> f;
    f.horizon = depth;
    f.tag = "ideal-delta(L=" + std::to_string(depth) + ")";
    f.eval = [x0](std::int64_t, std::span<const GroupElement> future, const DualProjPoint& y,
                  RngStream&) {
        return delta(boundary_point(future, x0), y);
    };
    return f;
}

Perturbation<DualSpace> finite_range_delta_perturbation(std::int64_t m, const ProjPoint& x_ref)
{
    if (m < 0) {
        throw_error(ErrorKind::ConfigError, "range must be >= 0");
    }
    Perturbation<DualSpace> f;
    f.horizon = m;
    f.tag = "finite-range-delta(m=" + std::to_string(m) + ")";
    f.eval = [m, x_ref](std::int64_t n, std::span<const GroupElement> future, const DualProjPoint& y,
                        RngStream&) {
        const std::int64_t range = m - n;
        if (range <= 0) {
            return delta(x_ref, y);
        }
        const std::size_t take = std::min<std::size_t>(future.size(), static_cast<std::size_t>(range));
        if (take == 0) {
            return delta(x_ref, y);
        }
        return delta(boundary_point(future.first(take), x_ref), y);
    };
    return f;
}

TwistFunction boundary_twist(std::int64_t depth, const ProjPoint& x0,
                             std::function<double(const ProjPoint&)> phi, double sup_bound)
{
    if (depth < 1) {
        throw_error(ErrorKind::ConfigError, "depth must be >= 1");
    }
    TwistFunction theta;
    theta.lookahead = depth;
    theta.sup_bound = sup_bound;
    theta.tag = "boundary-twist(L=" + std::to_string(depth) + ")";
    theta.eval = [x0, phi = std::move(phi)](std::span<const GroupElement> letters) {
        return phi(boundary_point(letters, x0));
    };
    return theta;
}

std::vector<TwistRow> twist_profile(const Ensemble& ensemble, const TwistFunction& theta,
                                    const std::vector<std::int64_t>& p_list,
                                    std::int64_t n_samples, std::int64_t tail_draws,
                                    std::uint64_t seed, unsigned workers)
{
    const std::size_t levels = p_list.size();
    std::vector<double> gaps(static_cast<std::size_t>(n_samples) * levels);
    mc::for_each_sample(n_samples, seed, /*salt=*/0x9007, workers, [&](std::int64_t i, RngStream& rng) {
        std::vector<GroupElement> letters;
        letters.reserve(static_cast<std::size_t>(theta.lookahead));
        for (std::int64_t k = 0; k < theta.lookahead; ++k) {
            letters.push_back(ensemble.draw(rng));
        }
        const double value = theta(letters);
        RngStream tails = rng.fork(0xC0);
        std::vector<GroupElement> resampled = letters;
        for (std::size_t l = 0; l < levels; ++l) {
            const std::size_t p = static_cast<std::size_t>(std::min<std::int64_t>(
                p_list[l], theta.lookahead));
            KahanSum acc;
            for (std::int64_t d = 0; d < tail_draws; ++d) {
                for (std::size_t j = p; j < resampled.size(); ++j) {
                    resampled[j] = ensemble.draw(tails);
                }
                acc.add(theta(resampled));
            }
            const double projected = acc.value() / static_cast<double>(tail_draws);
            gaps[static_cast<std::size_t>(i) * levels + l] = std::abs(value - projected);
            std::copy(letters.begin(), letters.end(), resampled.begin());
        }
    });
    std::vector<TwistRow> rows;
    std::vector<double> col(static_cast<std::size_t>(n_samples));
    for (std::size_t l = 0; l < levels; ++l) {
        for (std::int64_t i = 0; i < n_samples; ++i) {
            col[static_cast<std::size_t>(i)] = gaps[static_cast<std::size_t>(i) * levels + l];
        }
        const MeanStderr ms = mean_stderr(col);
        rows.push_back({p_list[l], ms.mean, ms.stderr_});
    }
    return rows;
}

} // namespace linwalk
