#include "seamcam/batch.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <ostream>

#include <fmt/format.h>

#include "seamcam/csv.hpp"

namespace seamcam {

namespace {

void read_stream_file(const std::filesystem::path &path, std::vector<BundleItem> &out) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, fmt::format("cannot open '{}'", path.string()));
    }
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        BundleItem item;
        item.origin = fmt::format("{}:{}", path.string(), number);
        try {
            item.bundle = parse_bundle(line, item.origin);
        } catch (const Error &e) {
            item.error_code = e.code();
            item.error = e.what();
        }
        out.push_back(std::move(item));
    }
}

void read_single_file(const std::filesystem::path &path, std::vector<BundleItem> &out) {
    BundleItem item;
    item.origin = path.string();
    try {
        item.bundle = load_bundle(path);
    } catch (const Error &e) {
        item.error_code = e.code();
        item.error = e.what();
    }
    out.push_back(std::move(item));
}

}  // namespace

std::vector<BundleItem> read_bundles(const std::filesystem::path &path) {
    std::vector<BundleItem> items;
    if (std::filesystem::is_directory(path)) {
        std::vector<std::filesystem::path> files;
        for (const auto &entry : std::filesystem::directory_iterator(path)) {
            const auto ext = entry.path().extension();
            if (entry.is_regular_file() && (ext == ".json" || ext == ".jsonl" || ext == ".bundle")) {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        for (const auto &file : files) {
            if (file.extension() == ".jsonl") {
                read_stream_file(file, items);
            } else {
                read_single_file(file, items);
            }
        }
    } else if (path.extension() == ".jsonl") {
        read_stream_file(path, items);
    } else if (std::filesystem::exists(path)) {
        read_single_file(path, items);
    } else {
        throw Error(ErrorCode::IoError, fmt::format("'{}' does not exist", path.string()));
    }
    return items;
}

std::vector<BatchOutcome> batch_score(std::span<const BundleItem> items, const ScoringConfig &config, int workers) {
    config.validate();
    if (workers < 1) {
        throw Error(ErrorCode::ConfigError, fmt::format("workers must be >= 1, got {}", workers));
    }
    std::vector<BatchOutcome> outcomes(items.size());
    const auto count = static_cast<std::ptrdiff_t>(items.size());
#pragma omp parallel for schedule(dynamic) num_threads(workers)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        const auto &item = items[static_cast<std::size_t>(i)];
        auto &outcome = outcomes[static_cast<std::size_t>(i)];
        outcome.origin = item.origin;
        if (!item.bundle) {
            outcome.error_code = item.error_code;
            outcome.error = item.error;
            continue;
        }
        outcome.image_id = item.bundle->image_id;
        outcome.category = item.bundle->category;
        try {
            const auto start = std::chrono::steady_clock::now();
            outcome.result = seamcam_score(to_request(*item.bundle), config);
            outcome.latency_us =
                std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - start).count();
        } catch (const Error &e) {
            outcome.error_code = e.code();
            outcome.error = e.what();
        }
    }
    return outcomes;
}

std::size_t write_scores_csv(std::ostream &out, std::span<const BatchOutcome> outcomes) {
    out << kScoreCsvHeader << '\n';
    std::size_t written = 0;
    for (const auto &o : outcomes) {
        if (!o.result) {
            continue;
        }
        const auto &r = *o.result;
        csv::write_row(out, {o.image_id, o.category, fmt::format("{}", r.detectability), fmt::format("{}", r.score),
                             fmt::format("{}", r.kept_count), fmt::format("{}", r.subsets_evaluated),
                             fmt::format("{}", fmt::join(r.best_subset, ";"))});
        ++written;
    }
    return written;
}

}  // namespace seamcam
