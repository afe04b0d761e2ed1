#include "doctest.h"

#include <algorithm>

#include "seamcam/error.hpp"
#include "seamcam/synth.hpp"

using namespace seamcam;

TEST_CASE("synthetic instances are deterministic per seed") {
    const auto a = gen_synth_instance(77, 32, 32, 2, 8);
    const auto b = gen_synth_instance(77, 32, 32, 2, 8);
    CHECK(a.gt_masks == b.gt_masks);
    CHECK(a.proposals == b.proposals);
    CHECK(a.oracle == b.oracle);
    const auto c = gen_synth_instance(78, 32, 32, 2, 8);
    CHECK_FALSE(c.proposals == a.proposals);
}

TEST_CASE("no proposals records the empty-survivor oracle") {
    const auto inst = gen_synth_instance(5, 16, 16, 1, 0);
    CHECK(inst.oracle_detectability == 0.0);
    CHECK(inst.oracle_subset.empty());
    const auto result = seamcam_score(to_request(to_bundle(inst, "x")), ScoringConfig{});
    CHECK(result.score == 1.0);
}

TEST_CASE("instances are engine-valid and the engine reproduces the oracle") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto inst = gen_synth_instance(seed, 32, 32, 1 + static_cast<int>(seed % 3), static_cast<int>(seed % 11));
        for (const auto &p : inst.proposals) {
            REQUIRE(p.alpha >= 0.0);
            REQUIRE(p.alpha <= 1.0);
            REQUIRE(p.beta >= 0.0);
            REQUIRE(p.beta <= 1.0);
        }
        const auto result = seamcam_score(to_request(to_bundle(inst, "x")), pass_all_config(inst.proposals.size()));
        REQUIRE(result.best == inst.oracle);
        REQUIRE(result.detectability == inst.oracle_detectability);
        if (!inst.proposals.empty()) {
            // pass-all ranking reorders proposals, so map back before comparing subsets
            std::vector<std::size_t> mapped;
            for (const auto i : result.best_subset) {
                mapped.push_back(result.kept_indices[i]);
            }
            std::sort(mapped.begin(), mapped.end());
            CHECK(overlap(mask_union([&] {
                              std::vector<DenseMask> m;
                              for (const auto i : mapped) {
                                  m.push_back(decode_rle(inst.proposals[i].mask));
                              }
                              return m;
                          }()),
                          [&] {
                              std::vector<DenseMask> g;
                              for (const auto &x : inst.gt_masks) {
                                  g.push_back(decode_rle(x));
                              }
                              return mask_union(g);
                          }()) == inst.oracle);
        }
    }
}

TEST_CASE("synthetic generator argument checks") {
    CHECK_THROWS_AS((void)gen_synth_instance(1, 8, 8, 0, 2), Error);
    CHECK_THROWS_AS((void)gen_synth_instance(1, 8, 8, 1, 11), Error);
    CHECK(pass_all_config(0).k_max == 1);
    CHECK(pass_all_config(8).k_max == 8);
}
