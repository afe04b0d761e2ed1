#include "seamcam/sweep.hpp"

#include <chrono>

#include "seamcam/error.hpp"

namespace seamcam {

SweepCell evaluate_cell(std::span<const LabeledPair> pairs, const ScoringConfig &config) {
    config.validate();
    SweepCell cell{config.tau_alpha, config.tau_beta, config.k_max, 0, 0, 0, std::nullopt, 0, 0};
    std::chrono::nanoseconds spent{0};
    std::size_t images = 0;
    for (const auto &pair : pairs) {
        if (pair.majority != Majority::a && pair.majority != Majority::b) {
            continue;
        }
        const auto start = std::chrono::steady_clock::now();
        const auto a = seamcam_score(pair.image_a, config);
        const auto b = seamcam_score(pair.image_b, config);
        spent += std::chrono::steady_clock::now() - start;
        images += 2;

        const auto prediction = predict_harder(a.score, b.score);
        if (prediction == Prediction::undecidable) {
            ++cell.undecidable;
            continue;
        }
        ++cell.decided;
        const bool right = (prediction == Prediction::a) == (pair.majority == Majority::a);
        cell.correct += right ? 1 : 0;
    }
    if (cell.decided > 0) {
        cell.accuracy = static_cast<double>(cell.correct) / static_cast<double>(cell.decided);
    }
    const std::size_t counted = cell.decided + cell.undecidable;
    if (counted > 0) {
        cell.half_credit_accuracy =
            (static_cast<double>(cell.correct) + 0.5 * static_cast<double>(cell.undecidable)) /
            static_cast<double>(counted);
    }
    if (images > 0) {
        cell.mean_latency_us =
            std::chrono::duration<double, std::micro>(spent).count() / static_cast<double>(images);
    }
    return cell;
}

SweepResult staged_sweep(std::span<const LabeledPair> pairs, const SweepGrid &grid) {
    if (grid.tau_alpha_values.empty() || grid.tau_beta_values.empty() || grid.k_values.empty()) {
        throw Error(ErrorCode::InsufficientData, "sweep grid has an empty axis");
    }
    std::size_t labelled = 0;
    for (const auto &pair : pairs) {
        labelled += (pair.majority == Majority::a || pair.majority == Majority::b) ? 1 : 0;
    }
    if (labelled == 0) {
        throw Error(ErrorCode::InsufficientData, "no pair has a decided human majority");
    }
    for (const double a : grid.tau_alpha_values) {
        for (const double b : grid.tau_beta_values) {
            ScoringConfig{a, b, grid.stage1_k}.validate();
        }
    }
    for (const int k : grid.k_values) {
        ScoringConfig{0.5, 0.1, k}.validate();
    }

    SweepResult result;
    const std::size_t cols = grid.tau_beta_values.size();
    const std::size_t cells = grid.tau_alpha_values.size() * cols;
    result.stage1.resize(cells);
    const auto cell_count = static_cast<std::ptrdiff_t>(cells);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t c = 0; c < cell_count; ++c) {
        const auto idx = static_cast<std::size_t>(c);
        const ScoringConfig config{grid.tau_alpha_values[idx / cols], grid.tau_beta_values[idx % cols],
                                   grid.stage1_k};
        result.stage1[idx] = evaluate_cell(pairs, config);
    }

    const SweepCell *best = nullptr;
    for (const auto &cell : result.stage1) {
        if (!cell.accuracy) {
            continue;
        }
        if (best == nullptr || *cell.accuracy > *best->accuracy ||
            (*cell.accuracy == *best->accuracy && cell.decided > best->decided)) {
            best = &cell;
        }
    }
    if (best == nullptr) {
        return result;
    }
    result.best_tau_alpha = best->tau_alpha;
    result.best_tau_beta = best->tau_beta;

    for (const int k : grid.k_values) {
        result.stage2.push_back(evaluate_cell(pairs, ScoringConfig{best->tau_alpha, best->tau_beta, k}));
    }
    return result;
}

}  // namespace seamcam
