#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace treecover::rng {

// Philox4x32-10 counter-based generator. A stream is keyed by the master
// seed and a 64-bit stream id; successive blocks are indexed by a 64-bit
// counter. Replicas therefore draw from disjoint streams no matter how the
// work is scheduled.
class Philox {
  public:
    Philox() = default;
    Philox(std::uint64_t seed, std::uint64_t stream) { reset(seed, stream); }

    void reset(std::uint64_t seed, std::uint64_t stream) {
        key0_ = static_cast<std::uint32_t>(seed);
        key1_ = static_cast<std::uint32_t>(seed >> 32);
        stream_lo_ = static_cast<std::uint32_t>(stream);
        stream_hi_ = static_cast<std::uint32_t>(stream >> 32);
        block_ = 0;
        have_spare_ = false;
        have_normal_spare_ = false;
    }

    std::uint64_t next_u64() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        std::uint32_t c0 = static_cast<std::uint32_t>(block_);
        std::uint32_t c1 = static_cast<std::uint32_t>(block_ >> 32);
        std::uint32_t c2 = stream_lo_;
        std::uint32_t c3 = stream_hi_;
        std::uint32_t k0 = key0_, k1 = key1_;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c0;
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c2;
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            c0 = hi1 ^ c1 ^ k0;
            c1 = lo1;
            c2 = hi0 ^ c3 ^ k1;
            c3 = lo0;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        ++block_;
        spare_ = (std::uint64_t{c2} << 32) | c3;
        have_spare_ = true;
        return (std::uint64_t{c0} << 32) | c1;
    }

    // Uniform on (0, 1]; never returns 0 so log() stays finite.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Uniform on [0, 1).
    double uniform_co() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double exponential(double mean) { return -mean * std::log(uniform()); }

    // Unbiased integer in [0, bound); bound >= 1.
    std::uint32_t below(std::uint32_t bound) {
        std::uint64_t x = next_u64();
        __uint128_t m = static_cast<__uint128_t>(x) * bound;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < bound) {
            const std::uint64_t threshold = (0 - std::uint64_t{bound}) % bound;
            while (lo < threshold) {
                x = next_u64();
                m = static_cast<__uint128_t>(x) * bound;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint32_t>(m >> 64);
    }

    // Standard normal via Box-Muller with a cached spare.
    double normal() {
        if (have_normal_spare_) {
            have_normal_spare_ = false;
            return normal_spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform_co();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        normal_spare_ = r * std::sin(a);
        have_normal_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double variance) { return mean + std::sqrt(variance) * normal(); }

  private:
    std::uint32_t key0_ = 0, key1_ = 0;
    std::uint32_t stream_lo_ = 0, stream_hi_ = 0;
    std::uint64_t block_ = 0;
    std::uint64_t spare_ = 0;
    bool have_spare_ = false;
    double normal_spare_ = 0.0;
    bool have_normal_spare_ = false;
};

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// Lane layout inside a replica: distinct sub-streams for the walk, auxiliary
// fields and independent scalar draws.
enum class Lane : std::uint64_t {
    Walk = 0,
    FieldA = 1,
    FieldB = 2,
    Scalar = 3,
    Bootstrap = 4,
    Projection = 5,
};

inline std::uint64_t stream_id(std::uint64_t experiment_hash, std::uint64_t replica, Lane lane) {
    // 8 lanes per replica, replica ids folded with the experiment hash.
    return (experiment_hash * 0x9E3779B97F4A7C15ull) ^ (replica << 3) ^ static_cast<std::uint64_t>(lane);
}

inline Philox make_stream(std::uint64_t seed, std::string_view experiment, std::uint64_t replica,
                          Lane lane = Lane::Walk) {
    return Philox(seed, stream_id(fnv1a64(experiment), replica, lane));
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Sub-seed for one named experiment, so replica streams never collide across
// experiments sharing a master seed.
inline std::uint64_t experiment_seed(std::uint64_t master, std::string_view experiment) {
    return splitmix64(master ^ fnv1a64(experiment));
}

}  // namespace treecover::rng
