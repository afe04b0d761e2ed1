#include "seamcam/preference.hpp"

#include <fmt/format.h>

#include "seamcam/bundle.hpp"
#include "seamcam/error.hpp"

namespace seamcam {

using nlohmann::json;

PreferencePair select_hard_negative(const CandidateSet &set) {
    if (set.candidates.empty()) {
        throw Error(ErrorCode::EmptyCandidates,
                    fmt::format("candidate set for '{}' is empty", set.source_image_id));
    }
    const Candidate *loser = nullptr;
    double total = 0;
    for (const auto &c : set.candidates) {
        total += c.result.score;
        if (loser == nullptr || c.result.score > loser->result.score ||
            (c.result.score == loser->result.score && c.prompt_index < loser->prompt_index)) {
            loser = &c;
        }
    }
    PreferencePair pair;
    pair.source_image_id = set.source_image_id;
    pair.winner_ref = set.winner_ref;
    pair.loser_ref = loser->candidate_ref;
    pair.loser_prompt_index = loser->prompt_index;
    pair.loser_score = loser->result.score;
    pair.candidate_count = set.candidates.size();
    pair.mean_score = total / static_cast<double>(set.candidates.size());
    for (const auto &c : set.candidates) {
        if (&c != loser && (!pair.runner_up_score || c.result.score > *pair.runner_up_score)) {
            pair.runner_up_score = c.result.score;
        }
    }
    return pair;
}

CandidateSet candidate_set_from_json(const json &node, const ScoringConfig &config) {
    const auto fail = [](const std::string &what) { throw Error(ErrorCode::ParseError, what); };
    if (!node.is_object()) {
        fail("candidate set: expected an object");
    }
    CandidateSet set;
    const auto string_field = [&](const json &obj, const char *name, const std::string &where) {
        const auto it = obj.find(name);
        if (it == obj.end() || !it->is_string()) {
            fail(fmt::format("{}: missing string field '{}'", where, name));
        }
        return it->get<std::string>();
    };
    set.source_image_id = string_field(node, "source_image_id", "candidate set");
    set.winner_ref = string_field(node, "winner_ref", "candidate set");
    const auto it = node.find("candidates");
    if (it == node.end() || !it->is_array()) {
        fail("candidate set: missing array 'candidates'");
    }
    for (std::size_t i = 0; i < it->size(); ++i) {
        const auto &cj = (*it)[i];
        const auto where = fmt::format("candidates[{}]", i);
        if (!cj.is_object()) {
            fail(where + ": expected an object");
        }
        Candidate c;
        c.candidate_ref = string_field(cj, "candidate_ref", where);
        const auto k = cj.find("prompt_index");
        if (k == cj.end() || !k->is_number_integer()) {
            fail(where + ": missing integer 'prompt_index'");
        }
        c.prompt_index = k->get<int>();
        if (const auto r = cj.find("result"); r != cj.end()) {
            c.result = score_from_json(*r, where + ".result");
        } else if (const auto b = cj.find("bundle"); b != cj.end()) {
            c.result = seamcam_score(to_request(bundle_from_json(*b)), config);
        } else {
            fail(where + ": needs either 'result' or 'bundle'");
        }
        set.candidates.push_back(std::move(c));
    }
    return set;
}

json preference_to_json(const PreferencePair &pair) {
    json out{{"source_image_id", pair.source_image_id},
             {"winner_ref", pair.winner_ref},
             {"loser_ref", pair.loser_ref},
             {"loser_prompt_index", pair.loser_prompt_index},
             {"loser_score", pair.loser_score},
             {"mean_score", pair.mean_score},
             {"candidate_count", pair.candidate_count},
             {"mask_reused", pair.mask_reused}};
    out["runner_up_score"] = pair.runner_up_score ? json(*pair.runner_up_score) : json(nullptr);
    out["margin"] = pair.runner_up_score ? json(pair.loser_score - *pair.runner_up_score) : json(nullptr);
    return out;
}

}  // namespace seamcam
