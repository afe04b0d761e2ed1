#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "seamcam/mask.hpp"

namespace seamcam {

/// Hard cap on the number of proposals entering subset enumeration.
inline constexpr int kMaxTopK = 20;

struct Box {
    double x0 = 0;
    double y0 = 0;
    double x1 = 0;
    double y1 = 0;

    friend bool operator==(const Box &, const Box &) = default;
};

/// One detector proposal: box, text-image alignment (alpha), detection
/// confidence (beta) and the segmentation of the box.
struct Proposal {
    Box box;
    double alpha = 0;
    double beta = 0;
    BinaryMask mask;

    friend bool operator==(const Proposal &, const Proposal &) = default;
};

struct ScoringConfig {
    double tau_alpha = 0.50;
    double tau_beta = 0.10;
    int k_max = 7;

    /// Throws ConfigError. Thresholds must be finite and non-negative (a value
    /// above 1 gates every proposal); k_max must lie in [1, kMaxTopK].
    void validate() const;

    friend bool operator==(const ScoringConfig &, const ScoringConfig &) = default;
};

struct ScoringRequest {
    std::string image_id;
    std::string category;
    std::vector<BinaryMask> gt_masks;
    std::vector<Proposal> proposals;
};

struct DetectabilityResult {
    Overlap best;                        ///< counts of the winning subset
    double detectability = 0;            ///< best.ratio()
    std::vector<std::size_t> best_subset;
    std::uint64_t subsets_evaluated = 0;
};

struct ScoreResult {
    double detectability = 0;
    double score = 1;                       ///< 1 - detectability
    std::vector<std::size_t> best_subset;   ///< positions in the kept list
    std::size_t kept_count = 0;
    std::uint64_t subsets_evaluated = 0;
    Overlap best;
    std::vector<std::size_t> kept_indices;  ///< input positions of the kept proposals, in rank order

    friend bool operator==(const ScoreResult &, const ScoreResult &) = default;
};

/// Proposals with alpha >= tau_alpha and beta >= tau_beta, input order kept.
[[nodiscard]] std::vector<Proposal> gate_proposals(std::span<const Proposal> proposals, const ScoringConfig &config);

/// The first min(k_max, n) proposals sorted by beta desc, alpha desc, input index asc.
[[nodiscard]] std::vector<Proposal> select_top_k(std::span<const Proposal> gated, const ScoringConfig &config);

/// Gate then rank; returns input indices of the kept proposals in rank order.
[[nodiscard]] std::vector<std::size_t> kept_proposal_indices(std::span<const Proposal> proposals,
                                                             const ScoringConfig &config);

/// Maximum IoU between the union of any non-empty subset of `proposal_masks` and
/// `gt_union`. Ties on IoU go to the smallest subset, then the lexicographically
/// smallest index set. Throws EmptyInput, ShapeMismatch, or ConfigError when more
/// than kMaxTopK masks are given.
[[nodiscard]] DetectabilityResult detectability(std::span<const DenseMask> proposal_masks, const DenseMask &gt_union);

/// Serial reference for detectability(): every subset union is rebuilt pixel by
/// pixel. Same contract, same results.
[[nodiscard]] DetectabilityResult detectability_bruteforce(std::span<const DenseMask> proposal_masks,
                                                           const DenseMask &gt_union);

/// A request with every mask decoded and validated once, so it can be rescored
/// under many configurations.
class PreparedRequest {
public:
    explicit PreparedRequest(const ScoringRequest &request);

    [[nodiscard]] const std::string &image_id() const noexcept { return image_id_; }
    [[nodiscard]] const std::string &category() const noexcept { return category_; }
    [[nodiscard]] const DenseMask &gt_union() const noexcept { return gt_union_; }
    [[nodiscard]] std::span<const Proposal> proposals() const noexcept { return proposals_; }
    [[nodiscard]] std::span<const DenseMask> proposal_masks() const noexcept { return masks_; }

private:
    std::string image_id_;
    std::string category_;
    DenseMask gt_union_;
    std::vector<Proposal> proposals_;
    std::vector<DenseMask> masks_;
};

/// Gate, rank, enumerate. With no surviving proposal D = 0 and the score is 1.
/// Throws InvalidRequest or ConfigError.
[[nodiscard]] ScoreResult seamcam_score(const ScoringRequest &request, const ScoringConfig &config);
[[nodiscard]] ScoreResult seamcam_score(const PreparedRequest &request, const ScoringConfig &config);

}  // namespace seamcam
