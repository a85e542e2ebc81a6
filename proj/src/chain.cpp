#include "chainhash/chain.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <unordered_set>

#include "chainhash/errors.hpp"

namespace chainhash {
namespace {

void append_u32be(std::vector<std::uint8_t>& out, std::size_t value) {
    if (value > std::numeric_limits<std::uint32_t>::max()) {
        throw ValidationError("string longer than 2^32-1 bytes cannot be length-prefixed");
    }
    const auto v = static_cast<std::uint32_t>(value);
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void append_prefixed(std::vector<std::uint8_t>& out, std::string_view s) {
    append_u32be(out, s.size());
    out.insert(out.end(), s.begin(), s.end());
}

// Lexicographic enumeration of all size-k subsets of {0..n-1}.
std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t k) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    while (true) {
        out.push_back(idx);
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
        if (i == 0) break;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
    return out;
}

}  // namespace

ResponseTable::ResponseTable(std::vector<std::string> entries) : entries_(std::move(entries)) {
    if (entries_.size() != kResponseTableSize) {
        throw ValidationError("response table must have exactly 256 entries, got " +
                              std::to_string(entries_.size()));
    }
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].empty()) {
            throw ValidationError("response table entry " + std::to_string(i) + " is empty");
        }
    }
}

std::vector<std::string> ResponseTable::duplicate_entries() const {
    std::set<std::string> seen;
    std::set<std::string> dups;
    for (const auto& e : entries_) {
        if (!seen.insert(e).second) dups.insert(e);
    }
    return {dups.begin(), dups.end()};
}

QuestionSet::QuestionSet(std::vector<std::string> questions) : questions_(std::move(questions)) {
    if (questions_.size() < 2) {
        throw ValidationError("a chain needs at least 2 questions, got " +
                              std::to_string(questions_.size()));
    }
    std::unordered_set<std::string_view> seen;
    for (const auto& q : questions_) {
        if (q.empty()) {
            throw ValidationError("empty question");
        }
        if (!seen.insert(q).second) {
            throw ValidationError("duplicate question: " + q);
        }
    }
}

SecretKey SecretKey::from_string(std::string_view text) {
    return SecretKey(std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::vector<std::uint8_t> canonical_bytes(std::string_view question,
                                          const QuestionSet& questions,
                                          const ResponseTable& table,
                                          const SecretKey& key) {
    std::size_t total = 4 + question.size() + 4 + key.bytes().size();
    for (const auto& q : questions.questions()) total += 4 + q.size();
    for (const auto& t : table.entries()) total += 4 + t.size();

    std::vector<std::uint8_t> out;
    out.reserve(total);
    append_prefixed(out, question);
    for (const auto& q : questions.questions()) append_prefixed(out, q);
    for (const auto& t : table.entries()) append_prefixed(out, t);
    append_u32be(out, key.bytes().size());
    out.insert(out.end(), key.bytes().begin(), key.bytes().end());
    return out;
}

std::uint8_t target_index(const Digest& digest) {
    return digest[digest.size() - 1];
}

TargetAssignment create_chain(const QuestionSet& questions,
                              const ResponseTable& table,
                              const SecretKey& key) {
    TargetAssignment out;
    out.reserve(questions.size());
    for (const auto& q : questions.questions()) {
        const auto index = target_index(sha256(canonical_bytes(q, questions, table, key)));
        out.push_back(Assignment{q, index, table[index]});
    }
    return out;
}

ChainPlan partition_into_chains(const QuestionSet& questions, std::size_t num_chains) {
    const std::size_t k = questions.size();
    if (num_chains == 0) {
        throw ValidationError("num_chains must be positive");
    }
    if (num_chains > k / 2) {
        throw ValidationError("cannot split " + std::to_string(k) + " questions into " +
                              std::to_string(num_chains) + " chains of at least 2");
    }
    ChainPlan plan;
    const std::size_t base = k / num_chains;
    const std::size_t extra = k % num_chains;
    std::size_t pos = 0;
    for (std::size_t c = 0; c < num_chains; ++c) {
        const std::size_t len = base + (c < extra ? 1 : 0);
        std::vector<std::string> group(questions.questions().begin() + static_cast<std::ptrdiff_t>(pos),
                                       questions.questions().begin() + static_cast<std::ptrdiff_t>(pos + len));
        plan.chains.push_back(Chain{"chain-" + std::to_string(c), QuestionSet(std::move(group))});
        pos += len;
    }
    return plan;
}

std::size_t binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::size_t r = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
    }
    return r;
}

ChainPlan assign_collusion_resistant_chains(std::size_t num_instances,
                                            std::size_t collusion_bound,
                                            const QuestionSet& question_pool) {
    if (collusion_bound == 0 || num_instances == 0) {
        throw ValidationError("num_instances and collusion_bound must be positive");
    }
    if (collusion_bound >= num_instances) {
        throw ValidationError("collusion_bound must be smaller than num_instances");
    }
    const std::size_t chains = binomial(num_instances, collusion_bound);
    const std::size_t needed = 2 * chains;
    if (question_pool.size() < needed) {
        throw ValidationError("question pool too small: need " + std::to_string(needed) +
                              " questions, have " + std::to_string(question_pool.size()));
    }

    ChainPlan plan;
    for (std::size_t i = 0; i < num_instances; ++i) {
        plan.model_instances["instance-" + std::to_string(i)];
    }
    const auto subsets = combinations(num_instances, collusion_bound);
    for (std::size_t c = 0; c < subsets.size(); ++c) {
        const std::string id = "chain-" + std::to_string(c);
        plan.chains.push_back(Chain{id, QuestionSet({question_pool[2 * c], question_pool[2 * c + 1]})});
        for (auto member : subsets[c]) {
            plan.model_instances["instance-" + std::to_string(member)].push_back(id);
        }
    }
    return plan;
}

CollusionAssignment assign_collusion_resistant_chains(std::size_t num_instances,
                                                      std::size_t collusion_bound,
                                                      const QuestionSet& question_pool,
                                                      const ResponseTable& table,
                                                      const SecretKey& key) {
    CollusionAssignment out;
    out.plan = assign_collusion_resistant_chains(num_instances, collusion_bound, question_pool);
    for (const auto& chain : out.plan.chains) {
        out.assignments.emplace(chain.chain_id, create_chain(chain.questions, table, key));
    }
    return out;
}

}  // namespace chainhash
