#include "doctest.h"

#include <algorithm>

#include "seamcam/error.hpp"
#include "seamcam/score.hpp"
#include "test_util.hpp"

using namespace seamcam;

namespace {

ErrorCode code_of(auto &&fn) {
    try {
        fn();
    } catch (const Error &e) {
        return e.code();
    }
    FAIL("expected seamcam::Error");
    return ErrorCode::IoError;
}

Proposal make_proposal(double alpha, double beta, const DenseMask &mask) {
    return Proposal{Box{0, 0, static_cast<double>(mask.width()), static_cast<double>(mask.height())}, alpha, beta,
                    encode_rle(mask)};
}

Proposal bare(double alpha, double beta) { return make_proposal(alpha, beta, DenseMask(2, 2)); }

void check_same(const DetectabilityResult &fast, const DetectabilityResult &slow) {
    REQUIRE(fast.best == slow.best);
    REQUIRE(fast.best_subset == slow.best_subset);
    REQUIRE(fast.detectability == slow.detectability);
    REQUIRE(fast.subsets_evaluated == slow.subsets_evaluated);
}

}  // namespace

TEST_CASE("gating is inclusive at both thresholds") {
    const ScoringConfig defaults;
    CHECK(defaults.tau_alpha == 0.50);
    CHECK(defaults.tau_beta == 0.10);
    CHECK(defaults.k_max == 7);

    const std::vector<Proposal> in{bare(0.6, 0.2), bare(0.50, 0.10), bare(0.49, 0.9), bare(0.9, 0.09)};
    const auto kept = gate_proposals(in, defaults);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0] == in[0]);
    CHECK(kept[1] == in[1]);
}

TEST_CASE("top-k ranks by confidence with deterministic tie breaks") {
    const ScoringConfig defaults;
    std::vector<Proposal> ten;
    for (int i = 0; i < 10; ++i) {
        ten.push_back(bare(0.6, 0.1 + 0.05 * i));
    }
    const auto top = select_top_k(ten, defaults);
    REQUIRE(top.size() == 7);
    for (std::size_t i = 0; i + 1 < top.size(); ++i) {
        CHECK(top[i].beta > top[i + 1].beta);
    }
    CHECK(top.front().beta == ten.back().beta);

    const std::vector<Proposal> three{bare(0.6, 0.2), bare(0.7, 0.8), bare(0.9, 0.5)};
    const auto all = select_top_k(three, defaults);
    REQUIRE(all.size() == 3);
    CHECK(all[0] == three[1]);
    CHECK(all[1] == three[2]);
    CHECK(all[2] == three[0]);

    // equal beta: higher alpha first; equal alpha too: lower input index first
    const std::vector<Proposal> ties{bare(0.6, 0.5), bare(0.8, 0.5), bare(0.6, 0.5)};
    const auto order = kept_proposal_indices(ties, defaults);
    CHECK(order == std::vector<std::size_t>{1, 0, 2});
}

TEST_CASE("config validation") {
    CHECK_NOTHROW(ScoringConfig{0.5, 0.1, 20}.validate());
    CHECK(code_of([] { ScoringConfig{0.5, 0.1, 21}.validate(); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { ScoringConfig{0.5, 0.1, 0}.validate(); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { ScoringConfig{-0.1, 0.1, 7}.validate(); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { ScoringConfig{0.5, std::numeric_limits<double>::quiet_NaN(), 7}.validate(); }) ==
          ErrorCode::ConfigError);
    CHECK_NOTHROW(ScoringConfig{0.5, 1.01, 7}.validate());
}

TEST_CASE("hand enumeration: D = 0.8 through {A, B}") {
    const testing::HandInstance hand;
    const std::vector<DenseMask> masks{hand.a, hand.b, hand.c};

    // singletons and pairs, counted by hand: 2/4, 2/5, 0/5, {A,B} 4/5
    CHECK(iou(hand.a, hand.gt) == 0.5);
    CHECK(iou(hand.b, hand.gt) == 0.4);
    CHECK(iou(hand.c, hand.gt) == 0.0);
    CHECK(overlap(mask_union(hand.a, hand.b), hand.gt) == Overlap{4, 5});

    for (const auto &found : {detectability(masks, hand.gt), detectability_bruteforce(masks, hand.gt)}) {
        CHECK(found.best == Overlap{4, 5});
        CHECK(found.detectability == 4.0 / 5.0);
        CHECK(found.best_subset == std::vector<std::size_t>{0, 1});
        CHECK(found.subsets_evaluated == 7);
    }
}

TEST_CASE("perfect single proposal and duplicate masks") {
    const testing::HandInstance hand;
    const std::vector<DenseMask> exact{hand.gt};
    const auto found = detectability(exact, hand.gt);
    CHECK(found.detectability == 1.0);
    CHECK(found.best_subset == std::vector<std::size_t>{0});

    const std::vector<DenseMask> with_dup{hand.a, hand.b, hand.c, hand.b};
    const auto dup = detectability(with_dup, hand.gt);
    CHECK(dup.best == Overlap{4, 5});
    CHECK(dup.best_subset == std::vector<std::size_t>{0, 1});
    check_same(dup, detectability_bruteforce(with_dup, hand.gt));
}

TEST_CASE("tie-breaking prefers fewer members, then lexicographic order") {
    // two identical perfect masks: {0} wins over {1} and {0,1}
    const auto gt = DenseMask::from_string(2, 2, "1100");
    const std::vector<DenseMask> same{gt, gt};
    CHECK(detectability(same, gt).best_subset == std::vector<std::size_t>{0});

    // {0,3} and {1,2} both reach the same IoU; [0,3] < [1,2]
    const auto target = DenseMask::from_string(1, 4, "1111");
    const std::vector<DenseMask> halves{DenseMask::from_string(1, 4, "1100"), DenseMask::from_string(1, 4, "1100"),
                                        DenseMask::from_string(1, 4, "0011"), DenseMask::from_string(1, 4, "0011")};
    const auto found = detectability(halves, target);
    CHECK(found.best_subset == std::vector<std::size_t>{0, 2});
    check_same(found, detectability_bruteforce(halves, target));
}

TEST_CASE("detectability errors") {
    const testing::HandInstance hand;
    const std::vector<DenseMask> none;
    CHECK(code_of([&] { (void)detectability(none, hand.gt); }) == ErrorCode::EmptyInput);
    CHECK(code_of([&] { (void)detectability_bruteforce(none, hand.gt); }) == ErrorCode::EmptyInput);
    const std::vector<DenseMask> wrong{DenseMask(3, 3)};
    CHECK(code_of([&] { (void)detectability(wrong, hand.gt); }) == ErrorCode::ShapeMismatch);
    CHECK(code_of([&] { (void)detectability_bruteforce(wrong, hand.gt); }) == ErrorCode::ShapeMismatch);
    const std::vector<DenseMask> one{hand.a};
    CHECK(code_of([&] { (void)detectability(one, DenseMask(4, 4)); }) == ErrorCode::EmptyInput);
    const std::vector<DenseMask> many(21, hand.a);
    CHECK(code_of([&] { (void)detectability(many, hand.gt); }) == ErrorCode::ConfigError);
}

TEST_CASE("optimized enumeration equals the brute-force oracle") {
    SplitMix64 rng(31337);
    for (int trial = 0; trial < 300; ++trial) {
        const int h = 1 + static_cast<int>(rng.below(24));
        const int w = 1 + static_cast<int>(rng.below(24));
        const std::size_t k = 1 + rng.below(10);
        auto gt = testing::random_mask(rng, h, w, 0.2 + 0.5 * rng.uniform());
        if (area(gt) == 0) {
            gt.set(0);
        }
        std::vector<DenseMask> masks;
        for (std::size_t i = 0; i < k; ++i) {
            masks.push_back(testing::random_mask(rng, h, w, 0.6 * rng.uniform()));
        }
        check_same(detectability(masks, gt), detectability_bruteforce(masks, gt));
    }
}

TEST_CASE("large rasters take the parallel signature path and still match") {
    SplitMix64 rng(5);
    const auto gt = testing::random_mask(rng, 512, 600, 0.3);
    std::vector<DenseMask> masks;
    for (int i = 0; i < 4; ++i) {
        masks.push_back(testing::random_mask(rng, 512, 600, 0.25));
    }
    check_same(detectability(masks, gt), detectability_bruteforce(masks, gt));
}

TEST_CASE("K = 20 is accepted and stays exact") {
    SplitMix64 rng(11);
    auto gt = testing::random_mask(rng, 8, 8, 0.5);
    std::vector<DenseMask> masks;
    for (int i = 0; i < 20; ++i) {
        masks.push_back(testing::random_mask(rng, 8, 8, 0.1));
    }
    const auto found = detectability(masks, gt);
    CHECK(found.subsets_evaluated == (1U << 20U) - 1);
    // best IoU can only be checked against the oracle at this size with care; the
    // union of everything is one of the candidates, so D is at least its IoU
    CHECK(compare_ratio(found.best, overlap(mask_union(masks), gt)) >= 0);
}

TEST_CASE("seamcam_score pipeline") {
    const testing::HandInstance hand;
    ScoringRequest request{"hand", "owl", {encode_rle(hand.gt)}, {}};

    SUBCASE("no proposals") {
        const auto result = seamcam_score(request, ScoringConfig{});
        CHECK(result.score == 1.0);
        CHECK(result.detectability == 0.0);
        CHECK(result.kept_count == 0);
        CHECK(result.subsets_evaluated == 0);
        CHECK(result.best_subset.empty());
    }
    SUBCASE("perfect proposal") {
        request.proposals.push_back(make_proposal(0.9, 0.9, hand.gt));
        const auto result = seamcam_score(request, ScoringConfig{});
        CHECK(result.score == 0.0);
    }
    SUBCASE("hand instance through the full pipeline") {
        // ranked order will be C (beta 0.9), A (0.8), B (0.7)
        request.proposals = {make_proposal(0.6, 0.8, hand.a), make_proposal(0.6, 0.7, hand.b),
                             make_proposal(0.6, 0.9, hand.c), make_proposal(0.3, 0.9, hand.gt)};
        const auto result = seamcam_score(request, ScoringConfig{});
        CHECK(result.kept_indices == std::vector<std::size_t>{2, 0, 1});
        CHECK(result.detectability == 4.0 / 5.0);
        CHECK(result.score == 1.0 - result.detectability);
        CHECK(result.score == doctest::Approx(0.2));
        CHECK(result.best_subset == std::vector<std::size_t>{1, 2});
        CHECK(result.subsets_evaluated == 7);
    }
    SUBCASE("everything gated out") {
        request.proposals = {make_proposal(0.6, 0.8, hand.a)};
        const auto result = seamcam_score(request, ScoringConfig{0.5, 1.01, 7});
        CHECK(result.score == 1.0);
        CHECK(result.kept_count == 0);
    }
}

TEST_CASE("seamcam_score rejects invalid requests") {
    const testing::HandInstance hand;
    const auto gt = encode_rle(hand.gt);
    const auto invalid = [](const ScoringRequest &r) {
        return code_of([&] { (void)seamcam_score(r, ScoringConfig{}); });
    };
    CHECK(invalid({"x", "c", {}, {}}) == ErrorCode::InvalidRequest);
    CHECK(invalid({"x", "c", {encode_rle(DenseMask(4, 4))}, {}}) == ErrorCode::InvalidRequest);
    CHECK(invalid({"x", "c", {gt, encode_rle(DenseMask(3, 4))}, {}}) == ErrorCode::InvalidRequest);
    CHECK(invalid({"x", "c", {gt}, {make_proposal(0.6, 0.6, DenseMask(3, 3))}}) == ErrorCode::InvalidRequest);
    CHECK(invalid({"x", "c", {gt}, {make_proposal(1.2, 0.6, hand.a)}}) == ErrorCode::InvalidRequest);
    auto outside = make_proposal(0.6, 0.6, hand.a);
    outside.box = Box{0, 0, 5, 2};
    CHECK(invalid({"x", "c", {gt}, {outside}}) == ErrorCode::InvalidRequest);
    auto inverted = make_proposal(0.6, 0.6, hand.a);
    inverted.box = Box{2, 0, 1, 2};
    CHECK(invalid({"x", "c", {gt}, {inverted}}) == ErrorCode::InvalidRequest);
    auto bad_rle = make_proposal(0.6, 0.6, hand.a);
    bad_rle.mask.counts = {3};
    CHECK(invalid({"x", "c", {gt}, {bad_rle}}) == ErrorCode::InvalidRequest);
    CHECK(code_of([&] { (void)seamcam_score(ScoringRequest{"x", "c", {gt}, {}}, ScoringConfig{0.5, 0.1, 21}); }) ==
          ErrorCode::ConfigError);
}

TEST_CASE("superset monotonicity and duplicate invariance on random instances") {
    SplitMix64 rng(2718);
    for (int trial = 0; trial < 200; ++trial) {
        auto gt = testing::random_mask(rng, 16, 16, 0.4);
        gt.set(0);
        std::vector<DenseMask> masks;
        const std::size_t k = 1 + rng.below(7);
        for (std::size_t i = 0; i < k; ++i) {
            masks.push_back(testing::random_mask(rng, 16, 16, 0.3 * rng.uniform()));
        }
        const auto base = detectability(masks, gt);

        auto dup = masks;
        dup.push_back(masks[rng.below(masks.size())]);
        CHECK(compare_ratio(detectability(dup, gt).best, base.best) == 0);

        auto grown = masks;
        grown.push_back(testing::random_mask(rng, 16, 16, 0.3));
        CHECK(compare_ratio(detectability(grown, gt).best, base.best) >= 0);
    }
}
