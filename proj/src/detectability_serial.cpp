// Reference subset enumeration. Deliberately literal: each subset union is
// rebuilt from scratch, one pixel at a time.

#include <algorithm>

#include <fmt/format.h>

#include "seamcam/error.hpp"
#include "seamcam/score.hpp"

namespace seamcam {

namespace {

std::vector<std::size_t> members(std::uint64_t subset) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; subset != 0; ++i, subset >>= 1U) {
        if ((subset & 1U) != 0) {
            out.push_back(i);
        }
    }
    return out;
}

}  // namespace

DetectabilityResult detectability_bruteforce(std::span<const DenseMask> proposal_masks, const DenseMask &gt_union) {
    if (proposal_masks.empty()) {
        throw Error(ErrorCode::EmptyInput, "no proposal masks");
    }
    if (proposal_masks.size() > static_cast<std::size_t>(kMaxTopK)) {
        throw Error(ErrorCode::ConfigError, fmt::format("{} masks exceed the enumeration cap of {}",
                                                        proposal_masks.size(), kMaxTopK));
    }
    for (const auto &m : proposal_masks) {
        if (m.height() != gt_union.height() || m.width() != gt_union.width()) {
            throw Error(ErrorCode::ShapeMismatch, "proposal mask shape differs from ground truth");
        }
    }
    const std::size_t pixels = gt_union.size();
    std::size_t gt_pixels = 0;
    for (std::size_t p = 0; p < pixels; ++p) {
        gt_pixels += gt_union.test(p) ? 1 : 0;
    }
    if (gt_pixels == 0) {
        throw Error(ErrorCode::EmptyInput, "ground-truth union is empty");
    }

    const std::size_t k = proposal_masks.size();
    DetectabilityResult result;
    bool have_best = false;
    for (std::uint64_t subset = 1; subset < (std::uint64_t{1} << k); ++subset) {
        const auto chosen = members(subset);
        DenseMask united(gt_union.height(), gt_union.width());
        for (std::size_t p = 0; p < pixels; ++p) {
            for (const auto i : chosen) {
                if (proposal_masks[i].test(p)) {
                    united.set(p);
                    break;
                }
            }
        }
        std::uint64_t inter = 0;
        std::uint64_t uni = 0;
        for (std::size_t p = 0; p < pixels; ++p) {
            const bool a = united.test(p);
            const bool b = gt_union.test(p);
            inter += (a && b) ? 1 : 0;
            uni += (a || b) ? 1 : 0;
        }
        ++result.subsets_evaluated;

        bool take = !have_best;
        if (have_best) {
            // inter / uni  vs  best.intersection / best.union_area
            const auto lhs = static_cast<unsigned __int128>(inter) * result.best.union_area;
            const auto rhs = static_cast<unsigned __int128>(result.best.intersection) * uni;
            if (lhs > rhs) {
                take = true;
            } else if (lhs == rhs) {
                if (chosen.size() != result.best_subset.size()) {
                    take = chosen.size() < result.best_subset.size();
                } else {
                    take = std::lexicographical_compare(chosen.begin(), chosen.end(), result.best_subset.begin(),
                                                        result.best_subset.end());
                }
            }
        }
        if (take) {
            result.best = Overlap{inter, uni};
            result.best_subset = chosen;
            have_best = true;
        }
    }
    result.detectability = result.best.ratio();
    return result;
}

}  // namespace seamcam
