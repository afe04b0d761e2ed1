#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace seamcam {

/// Canonical side of a study pair. Screen sides (left/right) never reach the
/// analysis; the collection service maps them back before persisting.
enum class Choice { a, b };
enum class Majority { a, b, tie, insufficient };
enum class Prediction { a, b, undecidable };

std::string_view to_string(Choice c) noexcept;
std::string_view to_string(Majority m) noexcept;
std::string_view to_string(Prediction p) noexcept;
std::optional<Choice> parse_choice(std::string_view text) noexcept;

struct VoteRecord {
    std::string pair_id;
    std::string participant_id;
    Choice choice = Choice::a;
    bool is_catch = false;
    std::optional<Choice> catch_expected;  ///< present iff is_catch
    std::optional<double> response_ms;

    friend bool operator==(const VoteRecord &, const VoteRecord &) = default;
};

struct StudyPair {
    std::string pair_id;
    std::string image_a;
    std::string image_b;
    std::string species;
    std::vector<VoteRecord> votes;  ///< valid votes only once assembled
    Majority majority = Majority::insufficient;
    std::map<std::string, std::pair<double, double>> metric_scores;

    [[nodiscard]] std::size_t votes_for(Choice side) const noexcept;
};

struct ParticipantSplit {
    std::set<std::string> retained;
    std::set<std::string> excluded;
};

/// A participant is excluded iff they saw catch trials and answered fewer than
/// `min_catch_accuracy` of them correctly. Participants without catch trials
/// are retained.
[[nodiscard]] ParticipantSplit filter_participants(std::span<const VoteRecord> votes, double min_catch_accuracy = 1.0);

inline constexpr std::size_t kMinResponses = 3;

/// Majority of already-filtered votes. Fewer than `min_responses` votes is
/// `insufficient`; equal counts is `tie`.
[[nodiscard]] Majority aggregate_majority(std::span<const VoteRecord> valid_votes,
                                          std::size_t min_responses = kMinResponses);
[[nodiscard]] Majority aggregate_majority(const StudyPair &pair, std::size_t min_responses = kMinResponses);

struct StudyOptions {
    double min_catch_accuracy = 1.0;
    std::size_t min_responses = kMinResponses;
};

struct StudyAssembly {
    std::vector<StudyPair> pairs;
    ParticipantSplit participants;
    std::size_t catch_votes = 0;
    std::size_t dropped_votes = 0;   ///< non-catch votes from excluded participants
    std::size_t unknown_pair_votes = 0;
};

/// Attaches the non-catch votes of retained participants to the pair
/// skeletons and computes every majority.
[[nodiscard]] StudyAssembly assemble_study(std::vector<StudyPair> skeletons, std::span<const VoteRecord> votes,
                                           const StudyOptions &options = {});

/// Records (score[image_a], score[image_b]) under `metric` for every pair whose
/// two images both have a score. Returns the number of pairs left unscored.
std::size_t attach_metric(std::span<StudyPair> pairs, const std::string &metric,
                          const std::map<std::string, double> &image_scores);

/// The harder (more camouflaged) image is the one with the higher score.
[[nodiscard]] Prediction predict_harder(double score_a, double score_b) noexcept;

enum class UndecidedPolicy {
    exclude,      ///< exact score ties leave the denominator
    half_credit,  ///< exact score ties count as half a correct answer
};

struct AccuracyReport {
    double accuracy = 0;
    std::size_t evaluable = 0;      ///< denominator actually used
    std::size_t correct = 0;
    std::size_t undecidable = 0;    ///< decided-majority pairs with tied metric scores
    std::size_t excluded_majority = 0;
    std::size_t missing_scores = 0;
};

/// Share of decided-majority pairs where the metric picks the human majority.
/// Throws NoEvaluablePairs when the denominator is empty.
[[nodiscard]] AccuracyReport agreement_accuracy(std::span<const StudyPair> pairs, const std::string &metric,
                                                UndecidedPolicy policy = UndecidedPolicy::exclude);

/// Per-pair 0/1 agreement over the pairs agreement_accuracy counts (exclude policy).
[[nodiscard]] std::vector<int> agreement_indicators(std::span<const StudyPair> pairs, const std::string &metric);

struct ContingencyCounts {
    std::size_t n00 = 0;  ///< both metrics wrong
    std::size_t n01 = 0;  ///< only the first metric right
    std::size_t n10 = 0;  ///< only the second metric right
    std::size_t n11 = 0;  ///< both right

    [[nodiscard]] std::size_t total() const noexcept { return n00 + n01 + n10 + n11; }
};

/// Paired agreement table over pairs where both metrics are decidable.
[[nodiscard]] ContingencyCounts contingency(std::span<const StudyPair> pairs, const std::string &first,
                                            const std::string &second);

struct SpeciesRow {
    std::string species;
    std::size_t correct = 0;
    std::size_t n = 0;
    double accuracy = 0;
    double wilson_lo = 0;
    double wilson_hi = 0;
};

/// One row per species with at least one evaluable pair, sorted by species.
[[nodiscard]] std::vector<SpeciesRow> per_species_accuracy(std::span<const StudyPair> pairs,
                                                           const std::string &metric);

/// |score_a - score_b| and the human vote margin |n_a - n_b| / (n_a + n_b) for
/// every pair agreement_accuracy counts.
struct GapMargin {
    std::vector<double> gap;
    std::vector<double> margin;
};
[[nodiscard]] GapMargin gap_vs_margin(std::span<const StudyPair> pairs, const std::string &metric);

}  // namespace seamcam
