#pragma once

#include <cstdint>

namespace tvdp {

/**
 * SplitMix64 (Steele, Lea and Flood 2014): 64-bit state, one add and a
 * three-step xor-shift-multiply finalizer per draw. Fully specified integer
 * arithmetic, so streams are identical on every platform and compiler.
 */
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform on [0, 1) from the top 53 bits.
    constexpr double uniform() noexcept {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound); bound > 0. Multiply-shift reduction.
    constexpr std::uint64_t below(std::uint64_t bound) noexcept {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * bound) >> 64);
    }

    /// Seed of an independent stream derived from (base, a, b).
    static constexpr std::uint64_t derive(std::uint64_t base, std::uint64_t a,
                                          std::uint64_t b) noexcept {
        SplitMix64 g(base ^ (a * 0xD1B54A32D192ED03ull));
        g.state_ ^= b * 0xAEF17502108EF2D9ull;
        return g.next();
    }

private:
    std::uint64_t state_;
};

}  // namespace tvdp
