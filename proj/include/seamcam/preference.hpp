#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "seamcam/score.hpp"

namespace seamcam {

/// Number of prompt variations generated per training image in the reference
/// training pipeline.
inline constexpr int kCandidatesPerImage = 12;

struct Candidate {
    std::string candidate_ref;
    int prompt_index = 0;
    ScoreResult result;
};

/// Generated candidates for one natural (winner) image.
struct CandidateSet {
    std::string source_image_id;
    std::string winner_ref;
    std::vector<Candidate> candidates;
};

struct PreferencePair {
    std::string source_image_id;
    std::string winner_ref;
    std::string loser_ref;
    int loser_prompt_index = 0;
    double loser_score = 0;
    std::optional<double> runner_up_score;  ///< next best candidate, if any
    double mean_score = 0;
    std::size_t candidate_count = 0;
    /// The supplied ground-truth mask was reused verbatim on the generated image.
    bool mask_reused = true;
};

/// The loser is the candidate with the highest camouflage score; ties go to
/// the lowest prompt index. Throws EmptyCandidates.
[[nodiscard]] PreferencePair select_hard_negative(const CandidateSet &set);

/// Parses one candidate-set object. Each candidate carries either a `result`
/// (a score object) or an inline `bundle`, which is scored with `config`.
[[nodiscard]] CandidateSet candidate_set_from_json(const nlohmann::json &node, const ScoringConfig &config);
[[nodiscard]] nlohmann::json preference_to_json(const PreferencePair &pair);

}  // namespace seamcam
