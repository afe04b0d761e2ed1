#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seamcam/bundle.hpp"
#include "seamcam/error.hpp"

namespace seamcam {

/// One entry of a bundle stream: a parsed bundle or the reason it failed to parse.
struct BundleItem {
    std::string origin;  ///< "file" or "file:line"
    std::optional<ProposalBundle> bundle;
    ErrorCode error_code = ErrorCode::ParseError;
    std::string error;
};

/// Reads a single-bundle `.json` file, a line-delimited `.jsonl` stream, or every
/// such file in a directory (sorted by name). Unparseable entries are kept as
/// failed items rather than aborting the read.
[[nodiscard]] std::vector<BundleItem> read_bundles(const std::filesystem::path &path);

struct BatchOutcome {
    std::string origin;
    std::string image_id;
    std::string category;
    std::optional<ScoreResult> result;
    std::optional<ErrorCode> error_code;
    std::string error;
    double latency_us = 0;  ///< engine time only
};

/// Scores every item with `workers` OpenMP threads. The output is in input
/// order and its content does not depend on the worker count; failures are
/// reported per item.
[[nodiscard]] std::vector<BatchOutcome> batch_score(std::span<const BundleItem> items, const ScoringConfig &config,
                                                    int workers);

inline constexpr const char *kScoreCsvHeader =
    "image_id,category,detectability,score,kept_count,subsets_evaluated,best_subset";

/// Writes successful outcomes as CSV rows; returns the number written.
std::size_t write_scores_csv(std::ostream &out, std::span<const BatchOutcome> outcomes);

}  // namespace seamcam
