// Subset-max IoU without materializing subset unions.
//
// Every pixel that lies in the ground truth or in some proposal gets a K-bit
// coverage signature (bit i set iff proposal i covers it). For a subset S the
// union covers exactly the pixels whose signature meets S, so
//
//   |U(S) & GT| = |GT|               - sum_{sig subset of ~S} gt[sig]
//   |U(S) | GT| = |GT| + |outside|   - sum_{sig subset of ~S} out[sig]
//
// where gt/out histogram signatures of pixels inside/outside the ground truth.
// The subset sums come from one zeta transform, O(K 2^K) after a single pass
// over the pixels.

#include <bit>
#include <vector>

#include <fmt/format.h>

#include "seamcam/error.hpp"
#include "seamcam/score.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace seamcam {

namespace {

// below these sizes the OpenMP fork/join costs more than it saves
constexpr std::size_t kParallelWords = 1U << 12U;
constexpr int kParallelSubsetBits = 14;

struct Candidate {
    std::uint64_t subset = 0;
    Overlap counts;
};

/// Total order used to pick the reported subset: higher IoU, then fewer
/// members, then lexicographically smaller index set.
bool better(const Candidate &a, const Candidate &b) noexcept {
    if (b.subset == 0) {
        return a.subset != 0;
    }
    if (a.subset == 0) {
        return false;
    }
    const int cmp = compare_ratio(a.counts, b.counts);
    if (cmp != 0) {
        return cmp > 0;
    }
    const int pa = std::popcount(a.subset);
    const int pb = std::popcount(b.subset);
    if (pa != pb) {
        return pa < pb;
    }
    const std::uint64_t diff = a.subset ^ b.subset;
    return (diff & a.subset & (~diff + 1)) != 0;
}

void accumulate_signatures(std::span<const DenseMask> masks, const DenseMask &gt, std::size_t word_begin,
                           std::size_t word_end, std::vector<std::uint64_t> &gt_hist,
                           std::vector<std::uint64_t> &out_hist) {
    const std::size_t k = masks.size();
    const auto gt_words = gt.words();
    for (std::size_t w = word_begin; w < word_end; ++w) {
        std::uint64_t any = gt_words[w];
        for (std::size_t i = 0; i < k; ++i) {
            any |= masks[i].words()[w];
        }
        while (any != 0) {
            const int bit = std::countr_zero(any);
            any &= any - 1;
            std::uint32_t sig = 0;
            for (std::size_t i = 0; i < k; ++i) {
                sig |= static_cast<std::uint32_t>((masks[i].words()[w] >> bit) & 1U) << i;
            }
            if (((gt_words[w] >> bit) & 1U) != 0) {
                ++gt_hist[sig];
            } else {
                ++out_hist[sig];
            }
        }
    }
}

void zeta_transform(std::vector<std::uint64_t> &values, std::size_t k) {
    const std::size_t n = values.size();
    for (std::size_t bit = 0; bit < k; ++bit) {
        const std::size_t step = std::size_t{1} << bit;
#pragma omp parallel for schedule(static) if (k >= kParallelSubsetBits)
        for (std::size_t t = 0; t < n; ++t) {
            if ((t & step) != 0) {
                values[t] += values[t ^ step];
            }
        }
    }
}

}  // namespace

DetectabilityResult detectability(std::span<const DenseMask> proposal_masks, const DenseMask &gt_union) {
    if (proposal_masks.empty()) {
        throw Error(ErrorCode::EmptyInput, "no proposal masks");
    }
    const std::size_t k = proposal_masks.size();
    if (k > static_cast<std::size_t>(kMaxTopK)) {
        throw Error(ErrorCode::ConfigError, fmt::format("{} masks exceed the enumeration cap of {}", k, kMaxTopK));
    }
    for (const auto &m : proposal_masks) {
        if (!m.same_shape(gt_union)) {
            throw Error(ErrorCode::ShapeMismatch, "proposal mask shape differs from ground truth");
        }
    }
    const std::uint64_t gt_area = area(gt_union);
    if (gt_area == 0) {
        throw Error(ErrorCode::EmptyInput, "ground-truth union is empty");
    }

    const std::size_t subsets = std::size_t{1} << k;
    const std::size_t words = gt_union.words().size();
    std::vector<std::uint64_t> gt_hist(subsets, 0);
    std::vector<std::uint64_t> out_hist(subsets, 0);

#ifdef _OPENMP
    if (words >= kParallelWords && k < kParallelSubsetBits) {
#pragma omp parallel
        {
            std::vector<std::uint64_t> local_gt(subsets, 0);
            std::vector<std::uint64_t> local_out(subsets, 0);
            const auto threads = static_cast<std::size_t>(omp_get_num_threads());
            const auto id = static_cast<std::size_t>(omp_get_thread_num());
            const std::size_t chunk = (words + threads - 1) / threads;
            const std::size_t begin = std::min(words, id * chunk);
            const std::size_t end = std::min(words, begin + chunk);
            accumulate_signatures(proposal_masks, gt_union, begin, end, local_gt, local_out);
#pragma omp critical(seamcam_signature_merge)
            for (std::size_t s = 0; s < subsets; ++s) {
                gt_hist[s] += local_gt[s];
                out_hist[s] += local_out[s];
            }
        }
    } else {
        accumulate_signatures(proposal_masks, gt_union, 0, words, gt_hist, out_hist);
    }
#else
    accumulate_signatures(proposal_masks, gt_union, 0, words, gt_hist, out_hist);
#endif

    std::uint64_t outside_area = 0;
    for (const auto c : out_hist) {
        outside_area += c;
    }
    zeta_transform(gt_hist, k);
    zeta_transform(out_hist, k);

    const std::size_t full = subsets - 1;
    const auto counts_for = [&](std::size_t subset) {
        const std::size_t rest = full & ~subset;
        return Overlap{gt_area - gt_hist[rest], gt_area + outside_area - out_hist[rest]};
    };

    Candidate best;
#pragma omp parallel if (static_cast<int>(k) >= kParallelSubsetBits)
    {
        Candidate local;
#pragma omp for schedule(static) nowait
        for (std::size_t s = 1; s < subsets; ++s) {
            const Candidate c{s, counts_for(s)};
            if (better(c, local)) {
                local = c;
            }
        }
#pragma omp critical(seamcam_subset_merge)
        if (better(local, best)) {
            best = local;
        }
    }

    DetectabilityResult result;
    result.best = best.counts;
    result.detectability = best.counts.ratio();
    result.subsets_evaluated = subsets - 1;
    for (std::size_t i = 0; i < k; ++i) {
        if (((best.subset >> i) & 1U) != 0) {
            result.best_subset.push_back(i);
        }
    }
    return result;
}

}  // namespace seamcam
