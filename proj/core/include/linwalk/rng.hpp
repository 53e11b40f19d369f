// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace linwalk {

/// Counter-based generator (Philox 4x32-10, Salmon et al. 2011).
///
/// A stream is identified by (seed, stream id). Streams with distinct ids are
/// statistically independent, which is what makes chunked parallel reductions
/// reproducible: every Monte Carlo sample owns a stream derived from the
/// master seed and the sample index, so results do not depend on the number
/// of workers or on scheduling.
class Philox {
  public:
    Philox() : Philox(0, 0) {}

    Philox(std::uint64_t seed, std::uint64_t stream)
    {
        key_[0] = static_cast<std::uint32_t>(seed);
        key_[1] = static_cast<std::uint32_t>(seed >> 32);
        ctr_ = {0u, 0u, static_cast<std::uint32_t>(stream),
                static_cast<std::uint32_t>(stream >> 32)};
        pos_ = 4;
    }

    using result_type = std::uint64_t;
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type(0); }

    result_type operator()() { return next_u64(); }

    std::uint64_t next_u64()
    {
        const std::uint32_t lo = next_u32();
        const std::uint32_t hi = next_u32();
        return (static_cast<std::uint64_t>(hi) << 32) | lo;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform()
    {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in (0, 1]; safe as a log() argument.
    double uniform_pos()
    {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller. Implemented here rather than with
    /// std::normal_distribution so streams are identical across standard
    /// libraries.
    double normal()
    {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return r * std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Index in [0, n) by inversion of a single uniform.
    std::size_t index(std::size_t n)
    {
        auto k = static_cast<std::size_t>(uniform() * static_cast<double>(n));
        return k < n ? k : n - 1;
    }

    /// Draw from a discrete law given its cumulative weights.
    std::size_t pick(const std::vector<double>& cdf)
    {
        const double u = uniform();
        std::size_t k = 0;
        while (k + 1 < cdf.size() && u >= cdf[k]) {
            ++k;
        }
        return k;
    }

  private:
    std::uint32_t next_u32()
    {
        if (pos_ == 4) {
            block_ = generate(ctr_, key_);
            advance();
            pos_ = 0;
        }
        return block_[pos_++];
    }

    void advance()
    {
        if (++ctr_[0] == 0) {
            ++ctr_[1];
        }
    }

    static std::array<std::uint32_t, 4> generate(std::array<std::uint32_t, 4> ctr,
                                                 std::array<std::uint32_t, 2> key)
    {
        constexpr std::uint32_t kWeylA = 0x9E3779B9u;
        constexpr std::uint32_t kWeylB = 0xBB67AE85u;
        constexpr std::uint32_t kMulA = 0xD2511F53u;
        constexpr std::uint32_t kMulB = 0xCD9E8D57u;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t prod0 = static_cast<std::uint64_t>(kMulA) * ctr[0];
            const std::uint64_t prod1 = static_cast<std::uint64_t>(kMulB) * ctr[2];
            const std::uint32_t hi0 = static_cast<std::uint32_t>(prod0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(prod0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(prod1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(prod1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += kWeylA;
            key[1] += kWeylB;
        }
        return ctr;
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> ctr_;
    std::array<std::uint32_t, 4> block_{};
    int pos_;
};

/// 64-bit mix (splitmix64 finalizer); used to derive child stream ids.
std::uint64_t mix64(std::uint64_t z);

/// RNG handle passed to samplers. Wraps a Philox stream and can fork
/// decorrelated child streams for nested sampling.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : seed_(seed), stream_(stream), engine_(seed, stream)
    {
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    double uniform() { return engine_.uniform(); }
    double uniform_pos() { return engine_.uniform_pos(); }
    double normal() { return engine_.normal(); }
    std::uint64_t next_u64() { return engine_.next_u64(); }
    std::size_t index(std::size_t n) { return engine_.index(n); }
    std::size_t pick(const std::vector<double>& cdf) { return engine_.pick(cdf); }

    /// Child stream for an independent purpose (tail resampling, inner
    /// draws). Children of distinct (stream, salt) pairs do not collide.
    RngStream fork(std::uint64_t salt) const
    {
        return RngStream(seed_, mix64(stream_ ^ mix64(salt + 0x9E3779B97F4A7C15ull)));
    }

    Philox& engine() { return engine_; }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    Philox engine_;
};

} // namespace linwalk
