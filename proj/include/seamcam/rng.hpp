#pragma once

#include <cstdint>
#include <string_view>

namespace seamcam {

/// SplitMix64 (Steele, Lea, Flood 2014). Every seeded component in the project
/// draws from this generator so that outputs are identical across platforms and
/// standard library implementations.
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30U)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27U)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31U);
    }

    /// Uniform integer in [0, bound) by multiply-shift with rejection (Lemire 2019).
    std::uint64_t below(std::uint64_t bound) noexcept;

    /// Uniform double in [0, 1) from the top 53 bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11U) * 0x1.0p-53; }

    /// Uniform double in [0, 1].
    double uniform_closed() noexcept {
        return static_cast<double>(next() >> 11U) / static_cast<double>((1ULL << 53U) - 1);
    }

private:
    std::uint64_t state_;
};

/// Stateless 64-bit finalizer used to derive independent sub-stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x ^= x >> 33U;
    x *= 0xFF51AFD7ED558CCDULL;
    x ^= x >> 33U;
    x *= 0xC4CEB9FE1A85EC53ULL;
    x ^= x >> 33U;
    return x;
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return mix64(seed ^ mix64(stream + 0x9E3779B97F4A7C15ULL));
}

/// FNV-1a, for turning identifiers into seed material.
constexpr std::uint64_t fnv1a(std::string_view text) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace seamcam
