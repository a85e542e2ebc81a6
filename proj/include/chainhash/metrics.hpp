#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace chainhash {

inline constexpr double kDefaultConfidence = 0.99;
inline constexpr std::size_t kRemovalTrialCap = 1000;
// Per-question success probabilities below this are treated as exactly zero.
inline constexpr double kNegligibleProbability = 1e-9;

// Product of per-token probabilities; 1.0 for an empty list.
double success_probability(std::span<const double> token_probs);

/// Probability that at least two distinct questions succeed at least once in
/// `trials` independent passes, with per-pass success probabilities `probs`.
/// Evaluates 1 - P(none) - P(exactly one) over a_i = 1 - (1 - p_i)^trials.
double at_least_two_prob(std::span<const double> probs, std::size_t trials = 1);

struct RequiredTrials {
    std::optional<std::size_t> trials;  // empty means removed
    bool removed() const { return !trials.has_value(); }
};

/// Smallest n with at_least_two_prob(probs, n) >= confidence, or removed if
/// n would exceed cap or fewer than two questions can ever succeed.
RequiredTrials required_trials(std::span<const double> probs,
                               double confidence = kDefaultConfidence,
                               std::size_t cap = kRemovalTrialCap);

struct Interval {
    double lower = 0.0;
    double upper = 1.0;
};

// 95% Wilson score interval unless z says otherwise.
Interval wilson_interval(std::size_t successes, std::size_t n, double z = 1.959963984540054);

struct BenchmarkScore {
    std::string name;
    double raw = 0.0;
    double baseline_raw = 0.0;
    double normalized = 0.0;
};

// raw / baseline per name, in the order of `raw`.
std::vector<BenchmarkScore> normalize_benchmarks(
    const std::vector<std::pair<std::string, double>>& raw,
    const std::vector<std::pair<std::string, double>>& baseline);

}  // namespace chainhash
