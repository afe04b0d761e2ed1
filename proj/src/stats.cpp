#include "seamcam/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "seamcam/error.hpp"
#include "seamcam/rng.hpp"

namespace seamcam {

McNemarResult mcnemar_cc(std::uint64_t n01, std::uint64_t n10) {
    const std::uint64_t discordant = n01 + n10;
    if (discordant == 0) {
        throw Error(ErrorCode::DegenerateTable, "McNemar test needs at least one discordant pair");
    }
    const double diff = std::abs(static_cast<double>(n01) - static_cast<double>(n10)) - 1.0;
    McNemarResult result;
    result.chi2 = diff * diff / static_cast<double>(discordant);
    result.p_value = std::erfc(std::sqrt(result.chi2 / 2.0));
    return result;
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
    if (trials == 0 || successes > trials) {
        throw Error(ErrorCode::InvalidCounts, fmt::format("invalid counts k={} n={}", successes, trials));
    }
    if (!(z > 0) || !std::isfinite(z)) {
        throw Error(ErrorCode::InvalidCounts, fmt::format("invalid quantile z={}", z));
    }
    const auto n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    Interval out{center - half, center + half};
    // pin the exact endpoints and keep the estimate bracketed despite rounding
    out.lo = successes == 0 ? 0.0 : std::clamp(out.lo, 0.0, p);
    out.hi = successes == trials ? 1.0 : std::clamp(out.hi, p, 1.0);
    return out;
}

namespace {

double percentile(std::span<const double> sorted, double q) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

Interval bootstrap_ci(std::span<const int> indicators, std::size_t resamples, std::uint64_t seed) {
    if (indicators.empty()) {
        throw Error(ErrorCode::EmptyInput, "bootstrap of an empty sample");
    }
    if (resamples == 0) {
        throw Error(ErrorCode::EmptyInput, "bootstrap with zero resamples");
    }
    const std::size_t n = indicators.size();
    std::vector<double> means(resamples);
    const auto r_count = static_cast<std::ptrdiff_t>(resamples);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < r_count; ++r) {
        SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        std::uint64_t hits = 0;
        for (std::size_t i = 0; i < n; ++i) {
            hits += indicators[rng.below(n)] != 0 ? 1 : 0;
        }
        means[static_cast<std::size_t>(r)] = static_cast<double>(hits) / static_cast<double>(n);
    }
    std::sort(means.begin(), means.end());
    return {percentile(means, 0.025), percentile(means, 0.975)};
}

std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) {
            ++j;
        }
        // positions i..j (0-based) share rank mean(i+1 .. j+1)
        const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) {
            ranks[order[t]] = rank;
        }
        i = j + 1;
    }
    return ranks;
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw Error(ErrorCode::LengthMismatch, fmt::format("lengths differ: {} vs {}", x.size(), y.size()));
    }
    if (x.size() < 2) {
        throw Error(ErrorCode::LengthMismatch, "need at least two points");
    }
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const auto n = static_cast<double>(rx.size());
    const double mean = (n + 1.0) / 2.0;  // ranks always average to this
    double sxy = 0;
    double sxx = 0;
    double syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        const double dx = rx[i] - mean;
        const double dy = ry[i] - mean;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0 || syy == 0) {
        throw Error(ErrorCode::ZeroVariance, "a rank vector is constant");
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace seamcam
