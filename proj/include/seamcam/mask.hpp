#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace seamcam {

/// Largest accepted mask side, in pixels.
inline constexpr int kMaxMaskSide = 16384;

/// Run-length encoded binary mask. Runs are taken in row-major order, the first
/// run counts zeros and runs alternate 0/1 from there. Canonical form has no
/// zero-length run except possibly the leading one.
struct BinaryMask {
    int height = 0;
    int width = 0;
    std::vector<std::int64_t> counts;

    friend bool operator==(const BinaryMask &, const BinaryMask &) = default;
};

[[nodiscard]] bool is_canonical(const BinaryMask &mask) noexcept;

/// Bit-packed row-major raster. Pixel (r, c) lives at flat index r * width + c;
/// bits past height * width in the last word are always zero.
class DenseMask {
public:
    DenseMask() = default;
    DenseMask(int height, int width);

    /// Builds a mask from a string of '0'/'1' characters (other characters are
    /// skipped, so rows may be separated by spaces or newlines).
    static DenseMask from_string(int height, int width, std::string_view bits);

    [[nodiscard]] int height() const noexcept { return height_; }
    [[nodiscard]] int width() const noexcept { return width_; }
    [[nodiscard]] std::size_t size() const noexcept {
        return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
    }
    [[nodiscard]] bool same_shape(const DenseMask &other) const noexcept {
        return height_ == other.height_ && width_ == other.width_;
    }

    [[nodiscard]] bool test(std::size_t index) const noexcept {
        return ((words_[index >> 6U] >> (index & 63U)) & 1U) != 0;
    }
    [[nodiscard]] bool test(int row, int col) const noexcept {
        return test(static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(col));
    }
    void set(std::size_t index, bool value = true) noexcept {
        const std::uint64_t bit = std::uint64_t{1} << (index & 63U);
        if (value) {
            words_[index >> 6U] |= bit;
        } else {
            words_[index >> 6U] &= ~bit;
        }
    }
    void set(int row, int col, bool value = true) noexcept {
        set(static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(col), value);
    }

    [[nodiscard]] std::span<const std::uint64_t> words() const noexcept { return words_; }
    [[nodiscard]] std::span<std::uint64_t> words() noexcept { return words_; }

    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const DenseMask &, const DenseMask &) = default;

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<std::uint64_t> words_;
};

/// Exact intersection / union pixel counts of a mask pair.
struct Overlap {
    std::uint64_t intersection = 0;
    std::uint64_t union_area = 0;

    /// IoU with the empty/empty case defined as 0.
    [[nodiscard]] double ratio() const noexcept {
        return union_area == 0 ? 0.0 : static_cast<double>(intersection) / static_cast<double>(union_area);
    }

    friend bool operator==(const Overlap &, const Overlap &) = default;
};

/// Exact rational comparison of two IoU values (no division involved).
[[nodiscard]] int compare_ratio(const Overlap &lhs, const Overlap &rhs) noexcept;

[[nodiscard]] DenseMask decode_rle(const BinaryMask &mask);
[[nodiscard]] BinaryMask encode_rle(const DenseMask &mask);

[[nodiscard]] std::size_t area(const DenseMask &mask) noexcept;

/// Pixelwise OR. Throws EmptyInput for an empty list and ShapeMismatch when
/// dimensions differ.
[[nodiscard]] DenseMask mask_union(std::span<const DenseMask> masks);
[[nodiscard]] DenseMask mask_union(const DenseMask &a, const DenseMask &b);
void union_into(DenseMask &accumulator, const DenseMask &other);

[[nodiscard]] Overlap overlap(const DenseMask &a, const DenseMask &b);
[[nodiscard]] double iou(const DenseMask &a, const DenseMask &b);

/// Same counts as overlap(decode_rle(a), decode_rle(b)), computed by merging the
/// two run lists directly.
[[nodiscard]] Overlap overlap_rle(const BinaryMask &a, const BinaryMask &b);

}  // namespace seamcam
