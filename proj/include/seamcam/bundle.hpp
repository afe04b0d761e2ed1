#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "json.hpp"
#include "seamcam/score.hpp"

namespace seamcam {

inline constexpr std::string_view kBundleSchema = "seamcam.bundle/1";

/// Detector/segmenter output for one image plus its ground truth. The engine
/// never interprets detector_id.
struct ProposalBundle {
    std::string image_id;
    std::string category;
    int height = 0;
    int width = 0;
    std::string detector_id;
    std::vector<Proposal> proposals;
    std::vector<BinaryMask> gt_masks;
    std::map<std::string, std::string> metadata;

    friend bool operator==(const ProposalBundle &, const ProposalBundle &) = default;
};

[[nodiscard]] nlohmann::json mask_to_json(const BinaryMask &mask);
/// `where` prefixes diagnostics (e.g. "proposals[3].mask"). Throws ParseError.
[[nodiscard]] BinaryMask mask_from_json(const nlohmann::json &node, const std::string &where = "mask");

[[nodiscard]] nlohmann::json bundle_to_json(const ProposalBundle &bundle);
/// Validates the whole bundle: schema tag (VersionError if unknown), field
/// types, run lengths, mask dimensions, alpha/beta ranges and boxes (ParseError
/// naming the offending field).
[[nodiscard]] ProposalBundle bundle_from_json(const nlohmann::json &node);

/// `source` is prepended to error messages, e.g. "batch.jsonl:12".
[[nodiscard]] ProposalBundle parse_bundle(std::string_view text, std::string_view source = "<input>");
[[nodiscard]] std::string serialize_bundle(const ProposalBundle &bundle);

[[nodiscard]] ProposalBundle load_bundle(const std::filesystem::path &path);
void save_bundle(const ProposalBundle &bundle, const std::filesystem::path &path);

[[nodiscard]] BinaryMask load_mask(const std::filesystem::path &path);
void save_mask(const BinaryMask &mask, const std::filesystem::path &path);

[[nodiscard]] ScoringRequest to_request(const ProposalBundle &bundle);

[[nodiscard]] nlohmann::json score_to_json(const ScoreResult &result);
[[nodiscard]] ScoreResult score_from_json(const nlohmann::json &node, const std::string &where = "result");

}  // namespace seamcam
