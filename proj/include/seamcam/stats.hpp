#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace seamcam {

/// Two-sided 97.5% standard normal quantile, to six decimals.
inline constexpr double kWilsonZ = 1.959964;
inline constexpr std::uint64_t kDefaultSeed = 20240611;
inline constexpr std::size_t kDefaultResamples = 10000;

struct McNemarResult {
    double chi2 = 0;
    double p_value = 1;
};

/// Continuity-corrected McNemar test on the discordant counts. The 1-dof
/// chi-square survival is erfc(sqrt(chi2 / 2)). Throws DegenerateTable when
/// n01 + n10 == 0.
[[nodiscard]] McNemarResult mcnemar_cc(std::uint64_t n01, std::uint64_t n10);

struct Interval {
    double lo = 0;
    double hi = 0;

    friend bool operator==(const Interval &, const Interval &) = default;
};

/// Wilson score interval for k successes in n trials. Throws InvalidCounts
/// unless 0 <= k <= n and n > 0.
[[nodiscard]] Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = kWilsonZ);

/// Percentile bootstrap (2.5 / 97.5, linear interpolation between order
/// statistics) of the mean of a 0/1 vector.
///
/// Resample r draws its indices from SplitMix64 seeded with
/// derive_seed(seed, r), each index via Lemire's bounded multiply-shift, so the
/// interval depends only on (indicators, resamples, seed) and not on thread
/// count. Throws EmptyInput.
[[nodiscard]] Interval bootstrap_ci(std::span<const int> indicators, std::size_t resamples = kDefaultResamples,
                                    std::uint64_t seed = kDefaultSeed);

/// Ranks starting at 1; tied values share the mean of their positions.
[[nodiscard]] std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation of the average ranks. Throws LengthMismatch (unequal
/// lengths or fewer than two points) or ZeroVariance.
[[nodiscard]] double spearman_rho(std::span<const double> x, std::span<const double> y);

}  // namespace seamcam
