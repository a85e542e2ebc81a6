#include <gtest/gtest.h>

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>

#include "chainhash/chain.hpp"
#include "chainhash/errors.hpp"
#include "chainhash/rng.hpp"
#include "support.hpp"

namespace chainhash {
namespace {

using testing::numbered_questions;
using testing::numbered_table;

SecretKey counting_key() {
    std::vector<std::uint8_t> bytes(16);
    for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = static_cast<std::uint8_t>(i);
    return SecretKey(bytes);
}

std::vector<int> indices(const TargetAssignment& a) {
    std::vector<int> out;
    for (const auto& x : a) out.push_back(x.target_index);
    return out;
}

std::string random_question(Rng& rng) {
    std::string s;
    for (int i = 0; i < 12; ++i) s.push_back(static_cast<char>('a' + rng.below(26)));
    return s;
}

TEST(ResponseTable, RequiresExactly256NonEmptyEntries) {
    EXPECT_THROW(ResponseTable(std::vector<std::string>(255, "x")), ValidationError);
    EXPECT_THROW(ResponseTable(std::vector<std::string>(257, "x")), ValidationError);
    auto entries = numbered_table().entries();
    entries[17].clear();
    EXPECT_THROW(ResponseTable{entries}, ValidationError);
}

TEST(ResponseTable, DuplicatesAreReportedNotRejected) {
    auto entries = numbered_table().entries();
    entries[3] = "t001";
    entries[9] = "t001";
    const ResponseTable t(entries);
    EXPECT_EQ(t.duplicate_entries(), std::vector<std::string>{"t001"});
    EXPECT_TRUE(numbered_table().duplicate_entries().empty());
}

TEST(QuestionSet, RejectsDuplicatesEmptiesAndSingletons) {
    EXPECT_THROW(QuestionSet({"a", "a"}), ValidationError);
    EXPECT_THROW(QuestionSet({"a", ""}), ValidationError);
    EXPECT_THROW(QuestionSet({"a"}), ValidationError);
    EXPECT_NO_THROW(QuestionSet({"a", "b"}));
}

TEST(SecretKey, WeakKeysAreFlagged) {
    EXPECT_FALSE(SecretKey{}.present());
    EXPECT_FALSE(SecretKey{}.is_weak());
    EXPECT_TRUE(SecretKey::from_string("short").is_weak());
    EXPECT_FALSE(counting_key().is_weak());
}

TEST(CanonicalBytes, LayoutStartsWithLengthPrefixedQuestion) {
    const ResponseTable table(std::vector<std::string>(256, "x"));
    const QuestionSet q({"A", "B"});
    const auto bytes = canonical_bytes("A", q, table, {});
    const std::vector<std::uint8_t> head{0, 0, 0, 1, 'A', 0, 0, 0, 1, 'A', 0, 0, 0, 1, 'B', 0, 0, 0, 1, 'x'};
    ASSERT_GE(bytes.size(), head.size());
    EXPECT_TRUE(std::equal(head.begin(), head.end(), bytes.begin()));
    // 5 (question) + 2*5 (set) + 256*5 (table) + 4 (empty key)
    EXPECT_EQ(bytes.size(), 5u + 10u + 1280u + 4u);
    const std::vector<std::uint8_t> tail{0, 0, 0, 0};
    EXPECT_TRUE(std::equal(tail.begin(), tail.end(), bytes.end() - 4));
}

TEST(CanonicalBytes, KeyIsLengthPrefixedAtTheEnd) {
    const auto table = numbered_table();
    const QuestionSet q({"A", "B"});
    const auto bytes = canonical_bytes("A", q, table, SecretKey::from_string("k1"));
    const std::vector<std::uint8_t> tail{0, 0, 0, 2, 'k', '1'};
    EXPECT_TRUE(std::equal(tail.begin(), tail.end(), bytes.end() - 6));
}

TEST(CanonicalBytes, LengthPrefixesKeepSplitsApart) {
    const auto table = numbered_table();
    const auto one = canonical_bytes("ab", QuestionSet({"ab", "c"}), table, {});
    const auto two = canonical_bytes("a", QuestionSet({"a", "bc"}), table, {});
    EXPECT_NE(one, two);
    EXPECT_EQ(create_chain(QuestionSet({"ab", "c"}), table)[0].target_index, 48);
    EXPECT_EQ(create_chain(QuestionSet({"a", "bc"}), table)[0].target_index, 125);
}

TEST(CreateChain, GoldenIndicesWithoutKey) {
    const auto a = create_chain(QuestionSet({"A", "B"}), numbered_table());
    ASSERT_EQ(a.size(), 2u);
    EXPECT_EQ(a[0].question, "A");
    EXPECT_EQ(a[0].target_index, 219);
    EXPECT_EQ(a[0].target_response, "t219");
    EXPECT_EQ(a[1].question, "B");
    EXPECT_EQ(a[1].target_index, 124);
    EXPECT_EQ(a[1].target_response, "t124");
}

TEST(CreateChain, GoldenIndicesWithKey) {
    const auto a = create_chain(QuestionSet({"A", "B"}), numbered_table(), counting_key());
    EXPECT_EQ(indices(a), (std::vector<int>{11, 122}));
}

TEST(CreateChain, GoldenIndicesForTenQuestions) {
    const auto a = create_chain(numbered_questions(10), numbered_table());
    EXPECT_EQ(indices(a), (std::vector<int>{140, 159, 39, 86, 107, 234, 69, 252, 237, 233}));
}

TEST(CreateChain, IndexIsLastDigestByte) {
    const auto table = numbered_table();
    const QuestionSet q({"A", "B"});
    const auto d = sha256(canonical_bytes("B", q, table, {}));
    EXPECT_EQ(target_index(d), d[31]);
    EXPECT_EQ(create_chain(q, table)[1].target_index, d[31]);
}

TEST(CreateChain, Deterministic) {
    const auto q = numbered_questions(10);
    EXPECT_EQ(create_chain(q, numbered_table()), create_chain(q, numbered_table()));
}

TEST(CreateChain, ReversedTableChangesTargets) {
    auto entries = numbered_table().entries();
    std::reverse(entries.begin(), entries.end());
    const auto a = create_chain(QuestionSet({"A", "B"}), ResponseTable(entries));
    EXPECT_EQ(indices(a), (std::vector<int>{187, 10}));
}

TEST(CreateChain, RandomTablePermutationsAlmostNeverPreserveAllIndices) {
    const auto q = numbered_questions(4);
    const auto base = indices(create_chain(q, numbered_table()));
    Rng rng(11);
    auto entries = numbered_table().entries();
    int unchanged = 0;
    for (int trial = 0; trial < 200; ++trial) {
        for (std::size_t i = entries.size() - 1; i > 0; --i) std::swap(entries[i], entries[rng.below(i + 1)]);
        if (indices(create_chain(q, ResponseTable(entries))) == base) ++unchanged;
    }
    // Each event has probability 256^-4.
    EXPECT_EQ(unchanged, 0);
}

TEST(CreateChain, QuestionOrderIsPartOfTheHash) {
    const auto table = numbered_table();
    const auto ab = create_chain(QuestionSet({"A", "B"}), table);
    const auto ba = create_chain(QuestionSet({"B", "A"}), table);
    EXPECT_EQ(ba[0].question, "B");
    EXPECT_NE(indices(ab), (std::vector<int>{ba[1].target_index, ba[0].target_index}));
}

TEST(CreateChain, MutatingOneQuestionReassignsTheOthers) {
    const auto table = numbered_table();
    auto questions = numbered_questions(10).questions();
    const auto base = indices(create_chain(QuestionSet(questions), table));
    Rng rng(3);
    std::size_t changed = 0, compared = 0;
    for (int trial = 0; trial < 600; ++trial) {
        auto mutated = questions;
        const auto m = rng.below(mutated.size());
        mutated[m] = random_question(rng);
        const auto got = indices(create_chain(QuestionSet(mutated), table));
        for (std::size_t i = 0; i < got.size(); ++i) {
            if (i == m) continue;
            ++compared;
            changed += got[i] != base[i];
        }
    }
    const double rate = double(changed) / double(compared);
    // 5400 comparisons; the std. error around 255/256 is below 0.001.
    EXPECT_NEAR(rate, 255.0 / 256.0, 0.005);
}

TEST(CreateChain, IndicesAreUniform) {
    const auto table = numbered_table();
    Rng rng(5);
    std::vector<double> bins(256, 0.0);
    const int n = 256 * 40;
    for (int i = 0; i < n; ++i) {
        const QuestionSet q({random_question(rng), "fixed companion"});
        bins[create_chain(q, table)[0].target_index] += 1;
    }
    const double expected = n / 256.0;
    double chi2 = 0;
    for (double b : bins) chi2 += (b - expected) * (b - expected) / expected;
    const boost::math::chi_squared dist(255);
    EXPECT_LT(chi2, boost::math::quantile(dist, 0.999));
}

TEST(CreateChain, RandomTablesMatchTwoTargetsAtChanceRate) {
    // A forger who draws a fresh table hits each of two fixed targets with
    // probability 1/256, independently.
    const QuestionSet q({"first question", "second question"});
    const auto base = indices(create_chain(q, numbered_table()));
    Rng rng(21);
    std::vector<std::string> entries(256);
    const int n = 60000;
    int first = 0, second = 0, both = 0;
    for (int trial = 0; trial < n; ++trial) {
        for (auto& e : entries) e = std::to_string(rng.next_u64());
        const auto got = indices(create_chain(q, ResponseTable(entries)));
        const bool a = got[0] == base[0];
        const bool b = got[1] == base[1];
        first += a;
        second += b;
        both += a && b;
    }
    const double p = 1.0 / 256.0;
    const double sigma = std::sqrt(n * p * (1 - p));
    EXPECT_NEAR(first, n * p, 4 * sigma);
    EXPECT_NEAR(second, n * p, 4 * sigma);
    // Expected joint count is n/65536 < 1; more than 6 has probability < 1e-5.
    EXPECT_LE(both, 6);
}

TEST(PartitionIntoChains, SplitsContiguously) {
    const auto q = numbered_questions(10);
    const auto one = partition_into_chains(q, 1);
    ASSERT_EQ(one.chains.size(), 1u);
    EXPECT_EQ(one.chains[0].questions, q);

    const auto two = partition_into_chains(q, 2);
    ASSERT_EQ(two.chains.size(), 2u);
    EXPECT_EQ(two.chains[0].questions.questions(), (std::vector<std::string>{"q0", "q1", "q2", "q3", "q4"}));
    EXPECT_EQ(two.chains[1].questions.questions(), (std::vector<std::string>{"q5", "q6", "q7", "q8", "q9"}));
    EXPECT_EQ(two.chains[0].chain_id, "chain-0");
    EXPECT_TRUE(two.model_instances.empty());
}

TEST(PartitionIntoChains, UnevenSizesDifferByAtMostOne) {
    const auto plan = partition_into_chains(numbered_questions(11), 3);
    std::vector<std::size_t> sizes;
    std::vector<std::string> all;
    for (const auto& c : plan.chains) {
        sizes.push_back(c.questions.size());
        all.insert(all.end(), c.questions.questions().begin(), c.questions.questions().end());
    }
    EXPECT_EQ(sizes, (std::vector<std::size_t>{4, 4, 3}));
    EXPECT_EQ(all, numbered_questions(11).questions());
}

TEST(PartitionIntoChains, RejectsChainsShorterThanTwo) {
    EXPECT_THROW(partition_into_chains(numbered_questions(5), 3), ValidationError);
    EXPECT_THROW(partition_into_chains(numbered_questions(5), 0), ValidationError);
    EXPECT_NO_THROW(partition_into_chains(numbered_questions(6), 3));
}

TEST(CollusionPlan, ThreeInstancesPairwise) {
    const auto plan = assign_collusion_resistant_chains(3, 2, numbered_questions(6));
    EXPECT_EQ(plan.chains.size(), 3u);
    for (const auto& [id, chains] : plan.model_instances) EXPECT_EQ(chains.size(), 2u) << id;
    const auto& m = plan.model_instances;
    auto shared = [&](const std::string& a, const std::string& b) {
        int n = 0;
        for (const auto& c : m.at(a)) n += std::count(m.at(b).begin(), m.at(b).end(), c);
        return n;
    };
    EXPECT_EQ(shared("instance-0", "instance-1"), 1);
    EXPECT_EQ(shared("instance-0", "instance-2"), 1);
    EXPECT_EQ(shared("instance-1", "instance-2"), 1);
}

TEST(CollusionPlan, OneChainPerInstanceWhenBoundIsOne) {
    const auto plan = assign_collusion_resistant_chains(2, 1, numbered_questions(4));
    EXPECT_EQ(plan.chains.size(), 2u);
    EXPECT_EQ(plan.model_instances.at("instance-0"), std::vector<std::string>{"chain-0"});
    EXPECT_EQ(plan.model_instances.at("instance-1"), std::vector<std::string>{"chain-1"});
}

TEST(CollusionPlan, PoolTooSmallNamesTheRequirement) {
    try {
        assign_collusion_resistant_chains(4, 2, numbered_questions(10));
        FAIL() << "expected rejection";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("need 12"), std::string::npos) << e.what();
    }
    EXPECT_THROW(assign_collusion_resistant_chains(3, 3, numbered_questions(10)), ValidationError);
    EXPECT_THROW(assign_collusion_resistant_chains(3, 0, numbered_questions(10)), ValidationError);
}

TEST(CollusionPlan, ExhaustiveForSmallParameters) {
    const auto pool = numbered_questions(2 * 20);
    for (std::size_t m = 2; m <= 6; ++m) {
        for (std::size_t c = 1; c <= 3 && c < m; ++c) {
            const auto plan = assign_collusion_resistant_chains(m, c, pool);
            EXPECT_EQ(plan.chains.size(), binomial(m, c));
            EXPECT_EQ(testing::check_collusion_plan(plan, c), "") << "m=" << m << " c=" << c;
            std::set<std::string> used;
            for (const auto& chain : plan.chains) {
                EXPECT_EQ(chain.questions.size(), 2u);
                for (const auto& q : chain.questions.questions()) EXPECT_TRUE(used.insert(q).second) << q;
            }
        }
    }
}

TEST(CollusionPlan, AssignmentsUseCreateChain) {
    const auto table = numbered_table();
    const auto out = assign_collusion_resistant_chains(3, 2, numbered_questions(6), table, {});
    ASSERT_EQ(out.assignments.size(), 3u);
    for (const auto& chain : out.plan.chains) {
        EXPECT_EQ(out.assignments.at(chain.chain_id), create_chain(chain.questions, table));
    }
}

TEST(Binomial, SmallValues) {
    EXPECT_EQ(binomial(6, 3), 20u);
    EXPECT_EQ(binomial(5, 0), 1u);
    EXPECT_EQ(binomial(3, 4), 0u);
}

}  // namespace
}  // namespace chainhash
