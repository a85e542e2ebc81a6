#include "chainhash/metrics.hpp"

#include <cmath>
#include <map>

#include "chainhash/errors.hpp"

namespace chainhash {
namespace {

void check_probability(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ValidationError("probability out of [0, 1]: " + std::to_string(p));
    }
}

double effective(double p) {
    return p < kNegligibleProbability ? 0.0 : p;
}

}  // namespace

double success_probability(std::span<const double> token_probs) {
    double product = 1.0;
    for (double p : token_probs) {
        check_probability(p);
        product *= p;
    }
    return product;
}

double at_least_two_prob(std::span<const double> probs, std::size_t trials) {
    if (trials == 0) {
        throw ValidationError("trials must be at least 1");
    }
    // Running P(no question has succeeded) and P(exactly one has) over the
    // questions seen so far; avoids dividing by (1 - a_i) when a_i == 1.
    double none = 1.0;
    double one = 0.0;
    for (double p : probs) {
        check_probability(p);
        const double miss = std::pow(1.0 - effective(p), static_cast<double>(trials));
        const double hit = 1.0 - miss;
        one = one * miss + none * hit;
        none *= miss;
    }
    const double result = 1.0 - none - one;
    return result < 0.0 ? 0.0 : (result > 1.0 ? 1.0 : result);
}

RequiredTrials required_trials(std::span<const double> probs, double confidence, std::size_t cap) {
    check_probability(confidence);
    std::size_t live = 0;
    for (double p : probs) {
        check_probability(p);
        if (effective(p) > 0.0) ++live;
    }
    if (live < 2 || cap == 0) {
        return {};
    }
    auto reaches = [&](std::size_t n) { return at_least_two_prob(probs, n) >= confidence; };

    // Doubling to bracket the answer, then bisection on (lo, hi].
    std::size_t lo = 0;
    std::size_t hi = 1;
    while (!reaches(hi)) {
        if (hi >= cap) {
            return {};
        }
        lo = hi;
        hi = std::min(hi * 2, cap);
    }
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (reaches(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return RequiredTrials{hi};
}

Interval wilson_interval(std::size_t successes, std::size_t n, double z) {
    if (n == 0) {
        return {0.0, 1.0};
    }
    const double nn = static_cast<double>(n);
    const double phat = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double centre = (phat + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

std::vector<BenchmarkScore> normalize_benchmarks(
    const std::vector<std::pair<std::string, double>>& raw,
    const std::vector<std::pair<std::string, double>>& baseline) {
    std::map<std::string, double> base;
    for (const auto& [name, score] : baseline) base[name] = score;

    std::vector<BenchmarkScore> out;
    out.reserve(raw.size());
    for (const auto& [name, score] : raw) {
        const auto it = base.find(name);
        if (it == base.end()) {
            throw ValidationError("no baseline score for benchmark " + name);
        }
        if (it->second == 0.0) {
            throw ValidationError("baseline score for " + name + " is zero");
        }
        out.push_back(BenchmarkScore{name, score, it->second, score == it->second ? 1.0 : score / it->second});
    }
    return out;
}

}  // namespace chainhash
