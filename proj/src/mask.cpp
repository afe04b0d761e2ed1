#include "seamcam/mask.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include <fmt/format.h>

#include "seamcam/error.hpp"

namespace seamcam {

namespace {

bool valid_side(int side) noexcept { return side > 0 && side <= kMaxMaskSide; }

void require_same_shape(const DenseMask &a, const DenseMask &b) {
    if (!a.same_shape(b)) {
        throw Error(ErrorCode::ShapeMismatch,
                    fmt::format("mask shapes differ: {}x{} vs {}x{}", a.height(), a.width(), b.height(), b.width()));
    }
}

}  // namespace

bool is_canonical(const BinaryMask &mask) noexcept {
    if (!valid_side(mask.height) || !valid_side(mask.width) || mask.counts.empty()) {
        return false;
    }
    std::int64_t total = 0;
    for (std::size_t i = 0; i < mask.counts.size(); ++i) {
        const auto run = mask.counts[i];
        if (run < 0 || (run == 0 && i != 0)) {
            return false;
        }
        total += run;
    }
    // a lone leading zero run would encode a zero-pixel mask
    if (mask.counts.size() == 1 && mask.counts[0] == 0) {
        return false;
    }
    return total == static_cast<std::int64_t>(mask.height) * mask.width;
}

DenseMask::DenseMask(int height, int width) : height_(height), width_(width) {
    if (!valid_side(height) || !valid_side(width)) {
        throw Error(ErrorCode::ShapeMismatch, fmt::format("invalid mask dimensions {}x{}", height, width));
    }
    words_.assign((size() + 63) / 64, 0);
}

DenseMask DenseMask::from_string(int height, int width, std::string_view bits) {
    DenseMask mask(height, width);
    std::size_t index = 0;
    for (char c : bits) {
        if (c != '0' && c != '1') {
            continue;
        }
        if (index >= mask.size()) {
            throw Error(ErrorCode::ShapeMismatch, "bit string longer than mask");
        }
        mask.set(index++, c == '1');
    }
    if (index != mask.size()) {
        throw Error(ErrorCode::ShapeMismatch, "bit string shorter than mask");
    }
    return mask;
}

std::string DenseMask::to_string() const {
    std::string out;
    out.reserve(size() + static_cast<std::size_t>(height_));
    for (int r = 0; r < height_; ++r) {
        if (r > 0) {
            out.push_back('\n');
        }
        for (int c = 0; c < width_; ++c) {
            out.push_back(test(r, c) ? '1' : '0');
        }
    }
    return out;
}

int compare_ratio(const Overlap &lhs, const Overlap &rhs) noexcept {
    // empty unions are ratio 0
    const auto lhs_num = lhs.union_area == 0 ? 0 : lhs.intersection;
    const auto rhs_num = rhs.union_area == 0 ? 0 : rhs.intersection;
    const auto lhs_den = lhs.union_area == 0 ? 1 : lhs.union_area;
    const auto rhs_den = rhs.union_area == 0 ? 1 : rhs.union_area;
    const auto left = static_cast<unsigned __int128>(lhs_num) * rhs_den;
    const auto right = static_cast<unsigned __int128>(rhs_num) * lhs_den;
    return left < right ? -1 : (left > right ? 1 : 0);
}

DenseMask decode_rle(const BinaryMask &mask) {
    if (!valid_side(mask.height) || !valid_side(mask.width)) {
        throw Error(ErrorCode::MalformedRle,
                    fmt::format("invalid mask dimensions {}x{}", mask.height, mask.width));
    }
    const auto expected = static_cast<std::int64_t>(mask.height) * mask.width;
    std::int64_t total = 0;
    for (std::size_t i = 0; i < mask.counts.size(); ++i) {
        if (mask.counts[i] < 0) {
            throw Error(ErrorCode::MalformedRle, fmt::format("negative run length at index {}", i));
        }
        total += mask.counts[i];
        if (total > expected) {
            break;
        }
    }
    if (total != expected) {
        throw Error(ErrorCode::MalformedRle,
                    fmt::format("run lengths do not cover the mask: {} pixels for a {}x{} mask", total,
                                mask.height, mask.width));
    }

    DenseMask dense(mask.height, mask.width);
    auto words = dense.words();
    std::size_t pos = 0;
    bool value = false;
    for (const auto run_length : mask.counts) {
        const auto run = static_cast<std::size_t>(run_length);
        if (value && run > 0) {
            std::size_t begin = pos;
            const std::size_t end = pos + run;
            // fill partial head word, whole words, partial tail word
            while (begin < end) {
                const std::size_t word = begin >> 6U;
                const std::size_t offset = begin & 63U;
                const std::size_t span = std::min<std::size_t>(64 - offset, end - begin);
                const std::uint64_t bits = span == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << span) - 1);
                words[word] |= bits << offset;
                begin += span;
            }
        }
        pos += run;
        value = !value;
    }
    return dense;
}

BinaryMask encode_rle(const DenseMask &mask) {
    BinaryMask out{mask.height(), mask.width(), {}};
    const std::size_t n = mask.size();
    bool value = false;
    std::int64_t run = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const bool bit = mask.test(i);
        if (bit != value) {
            out.counts.push_back(run);
            run = 0;
            value = bit;
        }
        ++run;
    }
    out.counts.push_back(run);
    return out;
}

std::size_t area(const DenseMask &mask) noexcept {
    std::size_t total = 0;
    for (const auto word : mask.words()) {
        total += static_cast<std::size_t>(std::popcount(word));
    }
    return total;
}

void union_into(DenseMask &accumulator, const DenseMask &other) {
    require_same_shape(accumulator, other);
    auto dst = accumulator.words();
    const auto src = other.words();
    const std::size_t n = dst.size();
#pragma omp simd
    for (std::size_t i = 0; i < n; ++i) {
        dst[i] |= src[i];
    }
}

DenseMask mask_union(std::span<const DenseMask> masks) {
    if (masks.empty()) {
        throw Error(ErrorCode::EmptyInput, "union of an empty mask list");
    }
    DenseMask result = masks.front();
    for (const auto &mask : masks.subspan(1)) {
        union_into(result, mask);
    }
    return result;
}

DenseMask mask_union(const DenseMask &a, const DenseMask &b) {
    DenseMask result = a;
    union_into(result, b);
    return result;
}

Overlap overlap(const DenseMask &a, const DenseMask &b) {
    require_same_shape(a, b);
    const auto lhs = a.words();
    const auto rhs = b.words();
    const std::size_t n = lhs.size();
    std::uint64_t inter = 0;
    std::uint64_t uni = 0;
#pragma omp simd reduction(+ : inter, uni)
    for (std::size_t i = 0; i < n; ++i) {
        inter += static_cast<std::uint64_t>(std::popcount(lhs[i] & rhs[i]));
        uni += static_cast<std::uint64_t>(std::popcount(lhs[i] | rhs[i]));
    }
    return {inter, uni};
}

double iou(const DenseMask &a, const DenseMask &b) { return overlap(a, b).ratio(); }

Overlap overlap_rle(const BinaryMask &a, const BinaryMask &b) {
    if (a.height != b.height || a.width != b.width) {
        throw Error(ErrorCode::ShapeMismatch,
                    fmt::format("mask shapes differ: {}x{} vs {}x{}", a.height, a.width, b.height, b.width));
    }
    // validates both run lists
    (void)decode_rle(a);
    (void)decode_rle(b);

    Overlap result;
    std::size_t ia = 0;
    std::size_t ib = 0;
    std::int64_t left_a = a.counts.empty() ? 0 : a.counts[0];
    std::int64_t left_b = b.counts.empty() ? 0 : b.counts[0];
    const auto total = static_cast<std::int64_t>(a.height) * a.width;
    std::int64_t pos = 0;
    while (pos < total) {
        while (left_a == 0) {
            left_a = a.counts[++ia];
        }
        while (left_b == 0) {
            left_b = b.counts[++ib];
        }
        const std::int64_t step = std::min(left_a, left_b);
        const bool on_a = (ia % 2) == 1;
        const bool on_b = (ib % 2) == 1;
        if (on_a && on_b) {
            result.intersection += static_cast<std::uint64_t>(step);
        }
        if (on_a || on_b) {
            result.union_area += static_cast<std::uint64_t>(step);
        }
        left_a -= step;
        left_b -= step;
        pos += step;
    }
    return result;
}

}  // namespace seamcam
