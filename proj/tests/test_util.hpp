#pragma once

#include <filesystem>
#include <string>

#include <unistd.h>

#include "seamcam/mask.hpp"
#include "seamcam/rng.hpp"

namespace seamcam::testing {

inline DenseMask random_mask(SplitMix64 &rng, int height, int width, double density) {
    DenseMask mask(height, width);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        mask.set(i, rng.uniform() < density);
    }
    return mask;
}

/// 4x4 grid, ground truth = 2x2 block at the origin.
/// A = top row of the block (IoU 1/2), B = bottom row plus a spill pixel (IoU 2/5),
/// C = the far corner (IoU 0).
struct HandInstance {
    DenseMask gt = DenseMask::from_string(4, 4, "1100 1100 0000 0000");
    DenseMask a = DenseMask::from_string(4, 4, "1100 0000 0000 0000");
    DenseMask b = DenseMask::from_string(4, 4, "0000 1100 1000 0000");
    DenseMask c = DenseMask::from_string(4, 4, "0000 0000 0000 0001");
};

class TempDir {
public:
    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        SplitMix64 rng(reinterpret_cast<std::uintptr_t>(this) ^ static_cast<std::uint64_t>(::getpid()));
        path_ = base / ("seamcam-test-" + std::to_string(rng.next()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir &) = delete;
    TempDir &operator=(const TempDir &) = delete;

    [[nodiscard]] const std::filesystem::path &path() const noexcept { return path_; }
    [[nodiscard]] std::filesystem::path operator/(const std::string &name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace seamcam::testing
