#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "seamcam/bundle.hpp"
#include "seamcam/study.hpp"

namespace seamcam {

inline constexpr int kMaxSynthProposals = 10;

/// Seeded fixture with its detectability certified by brute force over all of
/// its proposals (no gating). Score it with pass_all_config() to reproduce the
/// oracle through the engine.
struct SynthInstance {
    std::uint64_t seed = 0;
    int height = 0;
    int width = 0;
    std::vector<BinaryMask> gt_masks;
    std::vector<Proposal> proposals;  ///< alpha, beta ~ U[0, 1] from the instance seed
    Overlap oracle;
    double oracle_detectability = 0;
    std::vector<std::size_t> oracle_subset;
};

/// Deterministic in all arguments. Throws ConfigError unless n_gt >= 1 and
/// 0 <= n_prop <= kMaxSynthProposals.
[[nodiscard]] SynthInstance gen_synth_instance(std::uint64_t seed, int height, int width, int n_gt, int n_prop);

/// Every proposal survives gating and ranking.
[[nodiscard]] ScoringConfig pass_all_config(std::size_t proposals);

[[nodiscard]] ProposalBundle to_bundle(const SynthInstance &instance, const std::string &image_id,
                                       const std::string &category = "synthetic");

/// Study whose human majorities are planted to agree with the given scores:
/// image 2i is paired with image 2i+1 (in map order), and the image with the
/// higher score receives the majority of `participants` votes. Pairs with equal
/// scores get a seeded majority. Votes carry no catch trials.
struct PlantedStudy {
    std::vector<StudyPair> pairs;  ///< skeletons
    std::vector<VoteRecord> votes;
};

[[nodiscard]] PlantedStudy plant_study(const std::map<std::string, double> &image_scores, std::uint64_t seed,
                                       int participants = 5);

}  // namespace seamcam
