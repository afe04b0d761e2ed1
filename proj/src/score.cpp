#include "seamcam/score.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "seamcam/error.hpp"

namespace seamcam {

void ScoringConfig::validate() const {
    if (!std::isfinite(tau_alpha) || tau_alpha < 0) {
        throw Error(ErrorCode::ConfigError, fmt::format("tau_alpha must be finite and >= 0, got {}", tau_alpha));
    }
    if (!std::isfinite(tau_beta) || tau_beta < 0) {
        throw Error(ErrorCode::ConfigError, fmt::format("tau_beta must be finite and >= 0, got {}", tau_beta));
    }
    if (k_max < 1 || k_max > kMaxTopK) {
        throw Error(ErrorCode::ConfigError, fmt::format("k_max must lie in [1, {}], got {}", kMaxTopK, k_max));
    }
}

namespace {

bool passes_gate(const Proposal &p, const ScoringConfig &config) noexcept {
    return p.alpha >= config.tau_alpha && p.beta >= config.tau_beta;
}

std::vector<std::size_t> rank_indices(std::span<const Proposal> proposals, std::vector<std::size_t> order,
                                      std::size_t k_max) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t lhs, std::size_t rhs) {
        const auto &a = proposals[lhs];
        const auto &b = proposals[rhs];
        if (a.beta != b.beta) {
            return a.beta > b.beta;
        }
        if (a.alpha != b.alpha) {
            return a.alpha > b.alpha;
        }
        return lhs < rhs;
    });
    if (order.size() > k_max) {
        order.resize(k_max);
    }
    return order;
}

std::vector<Proposal> gather(std::span<const Proposal> proposals, std::span<const std::size_t> indices) {
    std::vector<Proposal> out;
    out.reserve(indices.size());
    for (const auto i : indices) {
        out.push_back(proposals[i]);
    }
    return out;
}

}  // namespace

std::vector<Proposal> gate_proposals(std::span<const Proposal> proposals, const ScoringConfig &config) {
    std::vector<Proposal> out;
    std::copy_if(proposals.begin(), proposals.end(), std::back_inserter(out),
                 [&](const Proposal &p) { return passes_gate(p, config); });
    return out;
}

std::vector<Proposal> select_top_k(std::span<const Proposal> gated, const ScoringConfig &config) {
    config.validate();
    std::vector<std::size_t> order(gated.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    return gather(gated, rank_indices(gated, std::move(order), static_cast<std::size_t>(config.k_max)));
}

std::vector<std::size_t> kept_proposal_indices(std::span<const Proposal> proposals, const ScoringConfig &config) {
    config.validate();
    std::vector<std::size_t> survivors;
    for (std::size_t i = 0; i < proposals.size(); ++i) {
        if (passes_gate(proposals[i], config)) {
            survivors.push_back(i);
        }
    }
    return rank_indices(proposals, std::move(survivors), static_cast<std::size_t>(config.k_max));
}

PreparedRequest::PreparedRequest(const ScoringRequest &request)
    : image_id_(request.image_id), category_(request.category), proposals_(request.proposals) {
    const auto fail = [&](const std::string &what) {
        throw Error(ErrorCode::InvalidRequest, fmt::format("request '{}': {}", request.image_id, what));
    };
    if (request.gt_masks.empty()) {
        fail("no ground-truth masks");
    }
    const int height = request.gt_masks.front().height;
    const int width = request.gt_masks.front().width;
    for (std::size_t j = 0; j < request.gt_masks.size(); ++j) {
        const auto &gt = request.gt_masks[j];
        if (gt.height != height || gt.width != width) {
            fail(fmt::format("ground-truth mask {} is {}x{}, expected {}x{}", j, gt.height, gt.width, height, width));
        }
        try {
            auto dense = decode_rle(gt);
            if (j == 0) {
                gt_union_ = std::move(dense);
            } else {
                union_into(gt_union_, dense);
            }
        } catch (const Error &e) {
            fail(fmt::format("ground-truth mask {}: {}", j, e.what()));
        }
    }
    if (area(gt_union_) == 0) {
        fail("ground-truth union is empty");
    }

    masks_.reserve(proposals_.size());
    for (std::size_t i = 0; i < proposals_.size(); ++i) {
        const auto &p = proposals_[i];
        if (!(p.alpha >= 0 && p.alpha <= 1) || !(p.beta >= 0 && p.beta <= 1)) {
            fail(fmt::format("proposal {}: alpha/beta outside [0,1]", i));
        }
        const auto &b = p.box;
        if (!(b.x0 >= 0 && b.x0 < b.x1 && b.x1 <= width && b.y0 >= 0 && b.y0 < b.y1 && b.y1 <= height)) {
            fail(fmt::format("proposal {}: box [{}, {}, {}, {}] outside a {}x{} image", i, b.x0, b.y0, b.x1, b.y1,
                             height, width));
        }
        if (p.mask.height != height || p.mask.width != width) {
            fail(fmt::format("proposal {}: mask is {}x{}, expected {}x{}", i, p.mask.height, p.mask.width, height,
                             width));
        }
        try {
            masks_.push_back(decode_rle(p.mask));
        } catch (const Error &e) {
            fail(fmt::format("proposal {}: {}", i, e.what()));
        }
    }
}

ScoreResult seamcam_score(const PreparedRequest &request, const ScoringConfig &config) {
    config.validate();
    ScoreResult result;
    result.kept_indices = kept_proposal_indices(request.proposals(), config);
    result.kept_count = result.kept_indices.size();
    if (result.kept_indices.empty()) {
        result.best = Overlap{0, area(request.gt_union())};
        return result;
    }

    std::vector<DenseMask> kept;
    kept.reserve(result.kept_indices.size());
    const auto all_masks = request.proposal_masks();
    for (const auto i : result.kept_indices) {
        kept.push_back(all_masks[i]);
    }
    auto found = detectability(kept, request.gt_union());
    result.detectability = found.detectability;
    result.score = 1.0 - found.detectability;
    result.best_subset = std::move(found.best_subset);
    result.subsets_evaluated = found.subsets_evaluated;
    result.best = found.best;
    return result;
}

ScoreResult seamcam_score(const ScoringRequest &request, const ScoringConfig &config) {
    config.validate();
    return seamcam_score(PreparedRequest(request), config);
}

}  // namespace seamcam
