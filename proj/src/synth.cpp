#include "seamcam/synth.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "seamcam/error.hpp"
#include "seamcam/rng.hpp"

namespace seamcam {

namespace {

struct Rect {
    int r0, c0, r1, c1;  // half-open
};

int uniform_int(SplitMix64 &rng, int lo, int hi) {  // inclusive
    return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

Rect random_rect(SplitMix64 &rng, int height, int width, double min_frac, double max_frac) {
    const auto side = [&](int extent) {
        const int lo = std::max(1, static_cast<int>(extent * min_frac));
        const int hi = std::max(lo, static_cast<int>(extent * max_frac));
        return uniform_int(rng, lo, std::min(hi, extent));
    };
    const int h = side(height);
    const int w = side(width);
    const int r0 = uniform_int(rng, 0, height - h);
    const int c0 = uniform_int(rng, 0, width - w);
    return {r0, c0, r0 + h, c0 + w};
}

void paint(DenseMask &mask, const Rect &rect) {
    for (int r = rect.r0; r < rect.r1; ++r) {
        for (int c = rect.c0; c < rect.c1; ++c) {
            mask.set(r, c);
        }
    }
}

void flip_noise(SplitMix64 &rng, DenseMask &mask, double rate) {
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (rng.uniform() < rate) {
            mask.set(i, !mask.test(i));
        }
    }
}

/// Tight bounding box of the set pixels; the whole image when empty.
Box bounding_box(const DenseMask &mask) {
    int r0 = mask.height();
    int c0 = mask.width();
    int r1 = -1;
    int c1 = -1;
    for (int r = 0; r < mask.height(); ++r) {
        for (int c = 0; c < mask.width(); ++c) {
            if (mask.test(r, c)) {
                r0 = std::min(r0, r);
                c0 = std::min(c0, c);
                r1 = std::max(r1, r);
                c1 = std::max(c1, c);
            }
        }
    }
    if (r1 < 0) {
        return {0, 0, static_cast<double>(mask.width()), static_cast<double>(mask.height())};
    }
    return {static_cast<double>(c0), static_cast<double>(r0), static_cast<double>(c1 + 1),
            static_cast<double>(r1 + 1)};
}

}  // namespace

SynthInstance gen_synth_instance(std::uint64_t seed, int height, int width, int n_gt, int n_prop) {
    if (n_gt < 1) {
        throw Error(ErrorCode::ConfigError, "a synthetic instance needs at least one ground-truth mask");
    }
    if (n_prop < 0 || n_prop > kMaxSynthProposals) {
        throw Error(ErrorCode::ConfigError,
                    fmt::format("n_prop must lie in [0, {}], got {}", kMaxSynthProposals, n_prop));
    }
    SynthInstance inst;
    inst.seed = seed;
    inst.height = height;
    inst.width = width;
    SplitMix64 rng(seed);

    std::vector<Rect> gt_rects;
    DenseMask gt_union(height, width);
    for (int j = 0; j < n_gt; ++j) {
        const auto rect = random_rect(rng, height, width, 0.2, 0.6);
        gt_rects.push_back(rect);
        DenseMask m(height, width);
        paint(m, rect);
        union_into(gt_union, m);
        inst.gt_masks.push_back(encode_rle(m));
    }

    std::vector<DenseMask> dense;
    for (int i = 0; i < n_prop; ++i) {
        DenseMask m(height, width);
        const auto kind = rng.below(4);
        if (kind <= 1) {
            // fragment of a ground-truth region, possibly spilling outside it
            const auto &g = gt_rects[rng.below(gt_rects.size())];
            const int gh = g.r1 - g.r0;
            const int gw = g.c1 - g.c0;
            const int h = uniform_int(rng, 1, gh);
            const int w = uniform_int(rng, 1, gw);
            int r0 = g.r0 + uniform_int(rng, 0, gh - h) + uniform_int(rng, -2, 2);
            int c0 = g.c0 + uniform_int(rng, 0, gw - w) + uniform_int(rng, -2, 2);
            r0 = std::clamp(r0, 0, height - h);
            c0 = std::clamp(c0, 0, width - w);
            paint(m, Rect{r0, c0, r0 + h, c0 + w});
        } else if (kind == 2) {
            paint(m, random_rect(rng, height, width, 0.1, 0.5));
        }
        // kind 3: noise only
        flip_noise(rng, m, kind == 3 ? 0.08 : 0.02);
        Proposal p;
        p.alpha = rng.uniform_closed();
        p.beta = rng.uniform_closed();
        p.box = bounding_box(m);
        p.mask = encode_rle(m);
        inst.proposals.push_back(std::move(p));
        dense.push_back(std::move(m));
    }

    if (dense.empty()) {
        inst.oracle = Overlap{0, area(gt_union)};
        inst.oracle_detectability = 0;
    } else {
        auto found = detectability_bruteforce(dense, gt_union);
        inst.oracle = found.best;
        inst.oracle_detectability = found.detectability;
        inst.oracle_subset = std::move(found.best_subset);
    }
    return inst;
}

ScoringConfig pass_all_config(std::size_t proposals) {
    return ScoringConfig{0.0, 0.0, static_cast<int>(std::clamp<std::size_t>(proposals, 1, kMaxTopK))};
}

ProposalBundle to_bundle(const SynthInstance &instance, const std::string &image_id, const std::string &category) {
    ProposalBundle b;
    b.image_id = image_id;
    b.category = category;
    b.height = instance.height;
    b.width = instance.width;
    b.detector_id = "synthetic";
    b.proposals = instance.proposals;
    b.gt_masks = instance.gt_masks;
    b.metadata["seed"] = std::to_string(instance.seed);
    return b;
}

PlantedStudy plant_study(const std::map<std::string, double> &image_scores, std::uint64_t seed, int participants) {
    if (participants < static_cast<int>(kMinResponses)) {
        throw Error(ErrorCode::ConfigError,
                    fmt::format("plant_study needs at least {} participants, got {}", kMinResponses, participants));
    }
    std::vector<std::pair<std::string, double>> images(image_scores.begin(), image_scores.end());
    PlantedStudy study;
    SplitMix64 rng(seed);
    const int needed = participants / 2 + 1;
    for (std::size_t i = 0; i + 1 < images.size(); i += 2) {
        const auto &[id_a, score_a] = images[i];
        const auto &[id_b, score_b] = images[i + 1];
        StudyPair pair;
        pair.pair_id = fmt::format("pair{:04}", i / 2);
        pair.image_a = id_a;
        pair.image_b = id_b;
        pair.species = fmt::format("species{}", (i / 2) % 4);
        const Choice harder = score_a > score_b   ? Choice::a
                              : score_b > score_a ? Choice::b
                              : (rng.next() & 1U) ? Choice::a
                                                  : Choice::b;
        const Choice easier = harder == Choice::a ? Choice::b : Choice::a;
        const int winners = needed + static_cast<int>(rng.below(static_cast<std::uint64_t>(participants - needed + 1)));
        for (int p = 0; p < participants; ++p) {
            VoteRecord v;
            v.pair_id = pair.pair_id;
            v.participant_id = fmt::format("p{:02}", p);
            v.choice = p < winners ? harder : easier;
            study.votes.push_back(std::move(v));
        }
        study.pairs.push_back(std::move(pair));
    }
    return study;
}

}  // namespace seamcam
