#include "doctest.h"

#include <algorithm>

#include "seamcam/rng.hpp"

#include "seamcam/bundle.hpp"
#include "seamcam/error.hpp"
#include "seamcam/preference.hpp"
#include "seamcam/synth.hpp"

using namespace seamcam;

namespace {

CandidateSet with_scores(std::initializer_list<double> scores) {
    CandidateSet set{"img1", "natural/img1.png", {}};
    int k = 0;
    for (const double s : scores) {
        ScoreResult r;
        r.score = s;
        r.detectability = 1.0 - s;
        set.candidates.push_back(Candidate{"gen/img1_" + std::to_string(k), k, r});
        ++k;
    }
    return set;
}

}  // namespace

TEST_CASE("hard negative is the highest-scoring candidate") {
    const auto pair = select_hard_negative(with_scores({0.2, 0.9, 0.4}));
    CHECK(pair.loser_ref == "gen/img1_1");
    CHECK(pair.loser_prompt_index == 1);
    CHECK(pair.loser_score == 0.9);
    CHECK(pair.winner_ref == "natural/img1.png");
    CHECK(*pair.runner_up_score == 0.4);
    CHECK(pair.mask_reused);

    const auto single = select_hard_negative(with_scores({0.3}));
    CHECK(single.loser_ref == "gen/img1_0");
    CHECK_FALSE(single.runner_up_score.has_value());
}

TEST_CASE("ties go to the lowest prompt index") {
    auto set = with_scores({0.5, 0.7, 0.7, 0.1});
    std::swap(set.candidates[1], set.candidates[2]);  // index 2 now precedes index 1
    const auto pair = select_hard_negative(set);
    CHECK(pair.loser_prompt_index == 1);
}

TEST_CASE("twelve candidates per image, and the loser score is always the max") {
    CHECK(kCandidatesPerImage == 12);
    SplitMix64 rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        CandidateSet set{"img", "w", {}};
        double max_score = -1;
        for (int k = 0; k < kCandidatesPerImage; ++k) {
            ScoreResult r;
            r.score = static_cast<double>(rng.below(20)) / 20.0;
            max_score = std::max(max_score, r.score);
            set.candidates.push_back(Candidate{"c" + std::to_string(k), k, r});
        }
        const auto pair = select_hard_negative(set);
        CHECK(pair.loser_score == max_score);
        CHECK(pair.candidate_count == 12);
    }
}

TEST_CASE("empty candidate sets are rejected") {
    try {
        (void)select_hard_negative(CandidateSet{"img", "w", {}});
        FAIL("expected EmptyCandidates");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::EmptyCandidates);
    }
}

TEST_CASE("candidate sets parse from results or inline bundles") {
    const auto inst = gen_synth_instance(3, 16, 16, 1, 4);
    const auto bundle = to_bundle(inst, "gen-3");
    nlohmann::json node{{"source_image_id", "img3"},
                        {"winner_ref", "nat/img3.png"},
                        {"candidates",
                         {{{"candidate_ref", "gen/a"}, {"prompt_index", 0}, {"result", {{"score", 0.25}}}},
                          {{"candidate_ref", "gen/b"}, {"prompt_index", 1}, {"bundle", bundle_to_json(bundle)}}}}};
    const ScoringConfig config{0.0, 0.0, 7};
    const auto set = candidate_set_from_json(node, config);
    REQUIRE(set.candidates.size() == 2);
    CHECK(set.candidates[0].result.score == 0.25);
    CHECK(set.candidates[1].result == seamcam_score(to_request(bundle), config));

    const auto out = preference_to_json(select_hard_negative(set));
    CHECK(out["winner_ref"] == "nat/img3.png");
    CHECK(out["mask_reused"] == true);

    node["candidates"][0].erase("result");
    CHECK_THROWS_AS((void)candidate_set_from_json(node, config), Error);
}
