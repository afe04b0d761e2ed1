#include "seamcam/rng.hpp"

namespace seamcam {

std::uint64_t SplitMix64::below(std::uint64_t bound) noexcept {
    if (bound == 0) {
        return 0;
    }
    auto product = static_cast<unsigned __int128>(next()) * bound;
    auto low = static_cast<std::uint64_t>(product);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            product = static_cast<unsigned __int128>(next()) * bound;
            low = static_cast<std::uint64_t>(product);
        }
    }
    return static_cast<std::uint64_t>(product >> 64U);
}

}  // namespace seamcam
