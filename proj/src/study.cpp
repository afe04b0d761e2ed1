#include "seamcam/study.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "seamcam/error.hpp"
#include "seamcam/stats.hpp"

namespace seamcam {

std::string_view to_string(Choice c) noexcept { return c == Choice::a ? "a" : "b"; }

std::string_view to_string(Majority m) noexcept {
    switch (m) {
        case Majority::a: return "a";
        case Majority::b: return "b";
        case Majority::tie: return "tie";
        case Majority::insufficient: return "insufficient";
    }
    return "insufficient";
}

std::string_view to_string(Prediction p) noexcept {
    switch (p) {
        case Prediction::a: return "a";
        case Prediction::b: return "b";
        case Prediction::undecidable: return "undecidable";
    }
    return "undecidable";
}

std::optional<Choice> parse_choice(std::string_view text) noexcept {
    if (text == "a") {
        return Choice::a;
    }
    if (text == "b") {
        return Choice::b;
    }
    return std::nullopt;
}

std::size_t StudyPair::votes_for(Choice side) const noexcept {
    return static_cast<std::size_t>(
        std::count_if(votes.begin(), votes.end(), [&](const VoteRecord &v) { return !v.is_catch && v.choice == side; }));
}

ParticipantSplit filter_participants(std::span<const VoteRecord> votes, double min_catch_accuracy) {
    struct Tally {
        std::size_t catches = 0;
        std::size_t passed = 0;
    };
    std::map<std::string, Tally> tallies;
    for (const auto &v : votes) {
        auto &t = tallies[v.participant_id];
        if (v.is_catch) {
            ++t.catches;
            if (v.catch_expected && *v.catch_expected == v.choice) {
                ++t.passed;
            }
        }
    }
    ParticipantSplit split;
    for (const auto &[participant, t] : tallies) {
        const bool fails = t.catches > 0 &&
                           static_cast<double>(t.passed) / static_cast<double>(t.catches) < min_catch_accuracy;
        (fails ? split.excluded : split.retained).insert(participant);
    }
    return split;
}

Majority aggregate_majority(std::span<const VoteRecord> valid_votes, std::size_t min_responses) {
    std::size_t for_a = 0;
    std::size_t for_b = 0;
    for (const auto &v : valid_votes) {
        if (v.is_catch) {
            continue;
        }
        (v.choice == Choice::a ? for_a : for_b) += 1;
    }
    if (for_a + for_b < min_responses) {
        return Majority::insufficient;
    }
    if (for_a == for_b) {
        return Majority::tie;
    }
    return for_a > for_b ? Majority::a : Majority::b;
}

Majority aggregate_majority(const StudyPair &pair, std::size_t min_responses) {
    return aggregate_majority(pair.votes, min_responses);
}

StudyAssembly assemble_study(std::vector<StudyPair> skeletons, std::span<const VoteRecord> votes,
                             const StudyOptions &options) {
    StudyAssembly out;
    out.participants = filter_participants(votes, options.min_catch_accuracy);
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < skeletons.size(); ++i) {
        skeletons[i].votes.clear();
        index.emplace(skeletons[i].pair_id, i);
    }
    for (const auto &v : votes) {
        if (v.is_catch) {
            ++out.catch_votes;
            continue;
        }
        if (out.participants.excluded.contains(v.participant_id)) {
            ++out.dropped_votes;
            continue;
        }
        const auto it = index.find(v.pair_id);
        if (it == index.end()) {
            ++out.unknown_pair_votes;
            continue;
        }
        skeletons[it->second].votes.push_back(v);
    }
    for (auto &pair : skeletons) {
        pair.majority = aggregate_majority(pair, options.min_responses);
    }
    out.pairs = std::move(skeletons);
    return out;
}

std::size_t attach_metric(std::span<StudyPair> pairs, const std::string &metric,
                          const std::map<std::string, double> &image_scores) {
    std::size_t missing = 0;
    for (auto &pair : pairs) {
        const auto a = image_scores.find(pair.image_a);
        const auto b = image_scores.find(pair.image_b);
        if (a == image_scores.end() || b == image_scores.end()) {
            pair.metric_scores.erase(metric);
            ++missing;
            continue;
        }
        pair.metric_scores[metric] = {a->second, b->second};
    }
    return missing;
}

Prediction predict_harder(double score_a, double score_b) noexcept {
    if (score_a > score_b) {
        return Prediction::a;
    }
    if (score_b > score_a) {
        return Prediction::b;
    }
    return Prediction::undecidable;
}

namespace {

bool decided(Majority m) noexcept { return m == Majority::a || m == Majority::b; }

bool matches(Prediction p, Majority m) noexcept {
    return (p == Prediction::a && m == Majority::a) || (p == Prediction::b && m == Majority::b);
}

/// nullopt when the pair does not count for this metric
std::optional<Prediction> prediction_for(const StudyPair &pair, const std::string &metric) {
    if (!decided(pair.majority)) {
        return std::nullopt;
    }
    const auto it = pair.metric_scores.find(metric);
    if (it == pair.metric_scores.end()) {
        return std::nullopt;
    }
    return predict_harder(it->second.first, it->second.second);
}

}  // namespace

AccuracyReport agreement_accuracy(std::span<const StudyPair> pairs, const std::string &metric,
                                  UndecidedPolicy policy) {
    AccuracyReport report;
    for (const auto &pair : pairs) {
        if (!decided(pair.majority)) {
            ++report.excluded_majority;
            continue;
        }
        const auto prediction = prediction_for(pair, metric);
        if (!prediction) {
            ++report.missing_scores;
            continue;
        }
        if (*prediction == Prediction::undecidable) {
            ++report.undecidable;
            continue;
        }
        ++report.evaluable;
        report.correct += matches(*prediction, pair.majority) ? 1 : 0;
    }
    double numerator = static_cast<double>(report.correct);
    if (policy == UndecidedPolicy::half_credit) {
        report.evaluable += report.undecidable;
        numerator += 0.5 * static_cast<double>(report.undecidable);
    }
    if (report.evaluable == 0) {
        throw Error(ErrorCode::NoEvaluablePairs, "no evaluable pairs for metric '" + metric + "'");
    }
    report.accuracy = numerator / static_cast<double>(report.evaluable);
    return report;
}

std::vector<int> agreement_indicators(std::span<const StudyPair> pairs, const std::string &metric) {
    std::vector<int> out;
    for (const auto &pair : pairs) {
        const auto prediction = prediction_for(pair, metric);
        if (prediction && *prediction != Prediction::undecidable) {
            out.push_back(matches(*prediction, pair.majority) ? 1 : 0);
        }
    }
    return out;
}

ContingencyCounts contingency(std::span<const StudyPair> pairs, const std::string &first,
                              const std::string &second) {
    ContingencyCounts counts;
    for (const auto &pair : pairs) {
        const auto p1 = prediction_for(pair, first);
        const auto p2 = prediction_for(pair, second);
        if (!p1 || !p2 || *p1 == Prediction::undecidable || *p2 == Prediction::undecidable) {
            continue;
        }
        const bool right1 = matches(*p1, pair.majority);
        const bool right2 = matches(*p2, pair.majority);
        if (right1 && right2) {
            ++counts.n11;
        } else if (right1) {
            ++counts.n01;
        } else if (right2) {
            ++counts.n10;
        } else {
            ++counts.n00;
        }
    }
    return counts;
}

std::vector<SpeciesRow> per_species_accuracy(std::span<const StudyPair> pairs, const std::string &metric) {
    std::map<std::string, SpeciesRow> rows;
    for (const auto &pair : pairs) {
        const auto prediction = prediction_for(pair, metric);
        if (!prediction || *prediction == Prediction::undecidable) {
            continue;
        }
        auto &row = rows[pair.species];
        row.species = pair.species;
        ++row.n;
        row.correct += matches(*prediction, pair.majority) ? 1 : 0;
    }
    std::vector<SpeciesRow> out;
    out.reserve(rows.size());
    for (auto &[species, row] : rows) {
        row.accuracy = static_cast<double>(row.correct) / static_cast<double>(row.n);
        const auto bounds = wilson_interval(row.correct, row.n);
        row.wilson_lo = bounds.lo;
        row.wilson_hi = bounds.hi;
        out.push_back(row);
    }
    return out;
}

GapMargin gap_vs_margin(std::span<const StudyPair> pairs, const std::string &metric) {
    GapMargin out;
    for (const auto &pair : pairs) {
        const auto prediction = prediction_for(pair, metric);
        if (!prediction || *prediction == Prediction::undecidable) {
            continue;
        }
        const auto &[sa, sb] = pair.metric_scores.at(metric);
        const auto na = static_cast<double>(pair.votes_for(Choice::a));
        const auto nb = static_cast<double>(pair.votes_for(Choice::b));
        out.gap.push_back(std::abs(sa - sb));
        out.margin.push_back(std::abs(na - nb) / (na + nb));
    }
    return out;
}

}  // namespace seamcam
