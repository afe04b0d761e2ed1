#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seamcam/score.hpp"
#include "seamcam/study.hpp"

namespace seamcam {

/// A human-labelled pair whose two images are rescored under each grid cell.
struct LabeledPair {
    std::string pair_id;
    std::string species;
    PreparedRequest image_a;
    PreparedRequest image_b;
    Majority majority;
};

struct SweepGrid {
    std::vector<double> tau_alpha_values;
    std::vector<double> tau_beta_values;
    std::vector<int> k_values;
    int stage1_k = 12;
};

struct SweepCell {
    double tau_alpha = 0;
    double tau_beta = 0;
    int k = 0;
    std::size_t decided = 0;      ///< pairs with a strict metric prediction
    std::size_t correct = 0;
    std::size_t undecidable = 0;  ///< pairs with tied scores
    std::optional<double> accuracy;  ///< correct / decided; empty when decided == 0
    double half_credit_accuracy = 0;
    double mean_latency_us = 0;   ///< engine scoring time per image
};

struct SweepResult {
    std::vector<SweepCell> stage1;  ///< row-major over (tau_alpha, tau_beta) at stage1_k
    /// Empty when no threshold cell decided a single pair; stage 2 is then skipped.
    std::optional<double> best_tau_alpha;
    std::optional<double> best_tau_beta;
    std::vector<SweepCell> stage2;  ///< one cell per k at the best thresholds
};

/// Scores every labelled pair under `config` and tallies agreement.
[[nodiscard]] SweepCell evaluate_cell(std::span<const LabeledPair> pairs, const ScoringConfig &config);

/// Stage 1 fixes K = grid.stage1_k and fills the threshold grid (cells run in
/// parallel). The best cell has the highest accuracy; ties go to more decided
/// pairs, then to grid order. Stage 2 keeps those thresholds and sweeps
/// grid.k_values serially so latencies are not contended. Pairs without a
/// decided human majority are ignored. Throws InsufficientData when no pair has
/// one or a grid axis is empty.
[[nodiscard]] SweepResult staged_sweep(std::span<const LabeledPair> pairs, const SweepGrid &grid);

}  // namespace seamcam
