// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

#include "linwalk/rng.hpp"
#include "linwalk/stats.hpp"

namespace linwalk {

/// Every Monte Carlo output carries its own uncertainty and provenance.
struct WeightedEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::int64_t n_samples = 0;
    std::uint64_t seed = 0;
};

struct VarianceEstimate {
    double upsilon_sq = 0.0;
    double stderr_ = 0.0;
    std::int64_t n_used = 0;
    bool degenerate = false; // estimate below 1e-8; the theory needs upsilon > 0
};

struct LyapunovEstimate {
    double lambda_hat = 0.0;
    double stderr_ = 0.0;
    std::int64_t steps = 0;
    std::int64_t replicas = 0;
};

namespace mc {

/// Default worker count for parallel sections.
inline unsigned default_workers()
{
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

/// Runs `body(sample_index, rng)` for sample_index in [0, n). Each sample
/// owns the Philox stream (seed, salt ^ index-mix), so output never depends
/// on worker count or scheduling; any reduction the caller performs must be
/// indexed by sample or chunk, never by arrival order.
template <typename Body>
void for_each_sample(std::int64_t n, std::uint64_t seed, std::uint64_t salt, unsigned workers,
                     Body&& body)
{
    if (workers <= 1 || n < 256) {
        for (std::int64_t i = 0; i < n; ++i) {
            RngStream rng(seed, mix64(salt) ^ static_cast<std::uint64_t>(i));
            body(i, rng);
        }
        return;
    }
    constexpr std::int64_t kChunk = 1024;
    const std::int64_t chunks = (n + kChunk - 1) / kChunk;
    std::atomic<std::int64_t> next{0};
    auto run = [&]() {
        for (;;) {
            const std::int64_t c = next.fetch_add(1);
            if (c >= chunks) {
                return;
            }
            const std::int64_t lo = c * kChunk;
            const std::int64_t hi = std::min(n, lo + kChunk);
            for (std::int64_t i = lo; i < hi; ++i) {
                RngStream rng(seed, mix64(salt) ^ static_cast<std::uint64_t>(i));
                body(i, rng);
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) {
        pool.emplace_back(run);
    }
    run();
    for (auto& t : pool) {
        t.join();
    }
}

/// Mean and standard error of a per-sample scalar functional, reduced in
/// fixed chunk order (workers affect wall time only).
template <typename Fn>
WeightedEstimate sample_mean(std::int64_t n, std::uint64_t seed, std::uint64_t salt,
                             unsigned workers, Fn&& fn)
{
    std::vector<double> values(static_cast<std::size_t>(n));
    for_each_sample(n, seed, salt, workers,
                    [&](std::int64_t i, RngStream& rng) { values[static_cast<std::size_t>(i)] = fn(i, rng); });
    const MeanStderr ms = mean_stderr(values);
    return WeightedEstimate{ms.mean, ms.stderr_, n, seed};
}

} // namespace mc

} // namespace linwalk
