#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "chainhash/errors.hpp"
#include "chainhash/metrics.hpp"
#include "chainhash/rng.hpp"

namespace chainhash {
namespace {

// Sums the probability of every outcome set with at least two successes.
double enumerate_at_least_two(const std::vector<double>& p, std::size_t trials) {
    const std::size_t k = p.size();
    std::vector<double> a(k);
    for (std::size_t i = 0; i < k; ++i) a[i] = 1.0 - std::pow(1.0 - p[i], double(trials));
    double total = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
        if (__builtin_popcount(mask) < 2) continue;
        double pr = 1.0;
        for (std::size_t i = 0; i < k; ++i) pr *= (mask >> i & 1u) ? a[i] : 1.0 - a[i];
        total += pr;
    }
    return total;
}

TEST(SuccessProbability, ProductOfTokenProbabilities) {
    EXPECT_DOUBLE_EQ(success_probability(std::vector<double>{0.5, 0.5}), 0.25);
    EXPECT_DOUBLE_EQ(success_probability(std::vector<double>{1.0}), 1.0);
    EXPECT_NEAR(success_probability(std::vector<double>{0.9, 0.9, 0.9}), 0.729, 1e-15);
    EXPECT_DOUBLE_EQ(success_probability(std::vector<double>{}), 1.0);
    EXPECT_THROW(success_probability(std::vector<double>{1.5}), ValidationError);
    EXPECT_THROW(success_probability(std::vector<double>{-0.1}), ValidationError);
    EXPECT_THROW(success_probability(std::vector<double>{std::nan("")}), ValidationError);
}

TEST(AtLeastTwo, SmallCases) {
    EXPECT_DOUBLE_EQ(at_least_two_prob(std::vector<double>{1.0, 1.0}), 1.0);
    EXPECT_DOUBLE_EQ(at_least_two_prob(std::vector<double>{0.5, 0.5}), 0.25);
    EXPECT_DOUBLE_EQ(at_least_two_prob(std::vector<double>{1.0}), 0.0);
    EXPECT_DOUBLE_EQ(at_least_two_prob(std::vector<double>{}), 0.0);
    EXPECT_THROW(at_least_two_prob(std::vector<double>{0.5, 0.5}, 0), ValidationError);
}

TEST(AtLeastTwo, FortyOnePercentOverTenQuestions) {
    const std::vector<double> p(10, 0.41);
    const double closed = at_least_two_prob(p, 1);
    EXPECT_NEAR(closed, 0.9594, 1e-4);
    EXPECT_NEAR(closed, 0.959370549610521, 1e-12);
    EXPECT_NEAR(closed, enumerate_at_least_two(p, 1), 1e-12);
}

TEST(AtLeastTwo, MatchesEnumerationUpToFifteenQuestions) {
    Rng rng(2024);
    for (std::size_t k = 2; k <= 15; ++k) {
        for (int rep = 0; rep < 4; ++rep) {
            std::vector<double> p(k);
            for (auto& x : p) x = rng.unit();
            if (rep == 1) p[0] = 1.0;
            if (rep == 2) p[k - 1] = 0.0;
            for (std::size_t trials : {1u, 3u, 17u}) {
                EXPECT_NEAR(at_least_two_prob(p, trials), enumerate_at_least_two(p, trials), 1e-12)
                    << "k=" << k << " rep=" << rep << " trials=" << trials;
            }
        }
    }
}

TEST(AtLeastTwo, MonotoneInTrialsAndProbabilities) {
    Rng rng(8);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> p(6);
        for (auto& x : p) x = rng.unit() * 0.3;
        double prev = 0.0;
        for (std::size_t n = 1; n <= 40; ++n) {
            const double f = at_least_two_prob(p, n);
            EXPECT_GE(f, prev - 1e-15);
            prev = f;
        }
        for (std::size_t i = 0; i < p.size(); ++i) {
            auto q = p;
            q[i] = std::min(1.0, q[i] + 0.1);
            EXPECT_GE(at_least_two_prob(q, 2), at_least_two_prob(p, 2) - 1e-15);
        }
    }
}

TEST(AtLeastTwo, NegligibleProbabilitiesCountAsZero) {
    EXPECT_EQ(at_least_two_prob(std::vector<double>{1.0, 1e-12}, 1000000), 0.0);
    EXPECT_GT(at_least_two_prob(std::vector<double>{1.0, 1e-8}, 1000000), 0.0);
}

TEST(RequiredTrials, KnownValues) {
    EXPECT_EQ(required_trials(std::vector<double>(10, 1.0)).trials, 1u);
    EXPECT_TRUE(required_trials(std::vector<double>(10, 0.0)).removed());
    EXPECT_EQ(required_trials(std::vector<double>(10, 0.1)).trials, 7u);
    EXPECT_EQ(required_trials(std::vector<double>(10, 0.41), 0.95).trials, 1u);
    EXPECT_EQ(required_trials(std::vector<double>(10, 0.41)).trials, 2u);
}

TEST(RequiredTrials, FewerThanTwoLiveQuestionsIsRemoved) {
    EXPECT_TRUE(required_trials(std::vector<double>{1.0, 0.0, 0.0}).removed());
    EXPECT_TRUE(required_trials(std::vector<double>{0.9, 1e-10}).removed());
    EXPECT_FALSE(required_trials(std::vector<double>{0.9, 0.9}).removed());
}

TEST(RequiredTrials, CapTurnsSlowFingerprintsIntoRemoved) {
    const std::vector<double> p(10, 1e-4);
    const auto uncapped = required_trials(p, 0.99, 1000000);
    ASSERT_FALSE(uncapped.removed());
    EXPECT_GT(*uncapped.trials, 1000u);
    EXPECT_TRUE(required_trials(p).removed());
    EXPECT_EQ(required_trials(p, 0.99, *uncapped.trials).trials, uncapped.trials);
    EXPECT_TRUE(required_trials(p, 0.99, *uncapped.trials - 1).removed());
}

TEST(RequiredTrials, ResultIsTheMinimalN) {
    Rng rng(31);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> p(2 + rng.below(12));
        for (auto& x : p) x = rng.unit() * (rep % 2 ? 0.05 : 0.6);
        const double conf = 0.5 + 0.49 * rng.unit();
        const auto r = required_trials(p, conf);
        if (r.removed()) {
            EXPECT_LT(at_least_two_prob(p, kRemovalTrialCap), conf);
            continue;
        }
        EXPECT_GE(at_least_two_prob(p, *r.trials), conf);
        if (*r.trials > 1) {
            EXPECT_LT(at_least_two_prob(p, *r.trials - 1), conf);
        }
    }
}

// First success of question i falls on trial G_i ~ Geometric(p_i); a campaign
// ends at the second-smallest G_i.
TEST(RequiredTrials, AgreesWithSimulatedCampaigns) {
    Rng rng(4242);
    const std::vector<double> p(10, 0.1);
    const int campaigns = 200000;
    std::vector<int> ends(campaigns);
    for (auto& end : ends) {
        int first = std::numeric_limits<int>::max(), second = first;
        for (double pi : p) {
            const double u = 1.0 - rng.unit();
            const int g = static_cast<int>(std::ceil(std::log(u) / std::log1p(-pi)));
            const int gi = std::max(g, 1);
            if (gi < first) {
                second = first;
                first = gi;
            } else if (gi < second) {
                second = gi;
            }
        }
        end = second;
    }
    std::sort(ends.begin(), ends.end());
    const int empirical = ends[static_cast<std::size_t>(std::ceil(0.99 * campaigns)) - 1];
    const auto analytic = required_trials(p);
    ASSERT_FALSE(analytic.removed());
    EXPECT_LE(std::abs(empirical - static_cast<int>(*analytic.trials)), 1);
}

TEST(Wilson, MatchesReferenceValues) {
    const auto a = wilson_interval(50, 100);
    EXPECT_NEAR(a.lower, 0.4038315303659956, 1e-12);
    EXPECT_NEAR(a.upper, 0.5961684696340044, 1e-12);
    const auto b = wilson_interval(0, 20);
    EXPECT_NEAR(b.lower, 0.0, 1e-12);
    EXPECT_NEAR(b.upper, 0.1611251580528194, 1e-12);
    const auto c = wilson_interval(37, 40);
    EXPECT_NEAR(c.lower, 0.8013576647568946, 1e-12);
    EXPECT_NEAR(c.upper, 0.9741639742254119, 1e-12);
}

TEST(Benchmarks, NormalizeAgainstBaseline) {
    const auto out = normalize_benchmarks({{"mmlu", 0.48}, {"truthfulqa", 0.55}, {"hellaswag", 0.8}},
                                          {{"mmlu", 0.50}, {"truthfulqa", 0.50}, {"hellaswag", 0.8}});
    ASSERT_EQ(out.size(), 3u);
    EXPECT_NEAR(out[0].normalized, 0.96, 1e-12);
    EXPECT_NEAR(out[1].normalized, 1.10, 1e-12);
    EXPECT_EQ(out[2].normalized, 1.0);
    EXPECT_EQ(out[0].baseline_raw, 0.50);
    EXPECT_THROW(normalize_benchmarks({{"mmlu", 0.5}}, {{"other", 0.5}}), ValidationError);
    EXPECT_THROW(normalize_benchmarks({{"mmlu", 0.5}}, {{"mmlu", 0.0}}), ValidationError);
}

}  // namespace
}  // namespace chainhash
