#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "seamcam/study.hpp"

namespace seamcam {

/// Reads a file holding either one JSON array or one JSON value per line.
/// Blank lines are skipped. Throws IoError or ParseError (with line number).
[[nodiscard]] std::vector<nlohmann::json> read_json_documents(const std::filesystem::path &path);

/// One vote per line:
/// {"pair_id", "participant_id", "choice": "a"|"b", "is_catch",
///  "catch_expected": "a"|"b"|null, "response_ms": number|null}
[[nodiscard]] nlohmann::json vote_to_json(const VoteRecord &vote);
[[nodiscard]] VoteRecord vote_from_json(const nlohmann::json &node, const std::string &where = "vote");

[[nodiscard]] std::vector<VoteRecord> read_votes(const std::filesystem::path &path);
void write_votes(std::ostream &out, std::span<const VoteRecord> votes);

/// Pair skeleton: {"pair_id", "image_a", "image_b", "species"}. Votes, majority
/// and metric scores are filled in by the analysis.
[[nodiscard]] nlohmann::json pair_to_json(const StudyPair &pair);
[[nodiscard]] StudyPair pair_from_json(const nlohmann::json &node, const std::string &where = "pair");

/// Accepts a JSON array or one object per line.
[[nodiscard]] std::vector<StudyPair> read_pairs(const std::filesystem::path &path);
void write_pairs(std::ostream &out, std::span<const StudyPair> pairs);

}  // namespace seamcam
