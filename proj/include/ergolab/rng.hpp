#pragma once

#include <cmath>
#include <cstdint>

namespace ergolab {

// SplitMix64 output function (Steele, Lea, Flood 2014). Bijective on u64.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// Combines a seed with stream/cell indices into a new 64-bit seed.
// Used to derive per-path and per-grid-cell streams from one master seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a) noexcept {
    return mix64(seed + kGolden * (a + 1));
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                    std::uint64_t b) noexcept {
    return derive_seed(derive_seed(seed, a), b);
}

// Counter-based random stream: draw k is mix64(key + k*golden), i.e. a
// SplitMix64 sequence addressed by (master_seed, stream) with the draw
// index as counter. Streams never share state, so paths can be simulated
// in any order or on any thread and reproduce bit-identically.
class PathRng {
public:
    PathRng(std::uint64_t master_seed, std::uint64_t stream) noexcept
        : key_(derive_seed(master_seed, stream)), counter_(0) {}

    std::uint64_t next_u64() noexcept { return mix64(key_ + kGolden * ++counter_); }

    // uniform on [0,1) with 53 random bits
    double uniform() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform on (0,1]
    double uniform_pos() noexcept { return 1.0 - uniform(); }

    // standard exponential (mean 1)
    double exponential() noexcept { return -std::log(uniform_pos()); }

    // standard normal via Box-Muller; consumes exactly two draws
    double normal() noexcept {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    std::uint64_t draws_consumed() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

}  // namespace ergolab
