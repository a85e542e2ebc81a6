#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "chainhash/sha256.hpp"

namespace chainhash {

inline constexpr std::size_t kResponseTableSize = 256;

/// The ordered list of 256 candidate responses a chain indexes into.
class ResponseTable {
public:
    // Throws ValidationError unless there are exactly 256 non-empty entries.
    explicit ResponseTable(std::vector<std::string> entries);

    const std::vector<std::string>& entries() const { return entries_; }
    const std::string& operator[](std::size_t i) const { return entries_[i]; }
    std::size_t size() const { return entries_.size(); }

    // Advisory: entries that occur more than once (reported, not rejected).
    std::vector<std::string> duplicate_entries() const;

    friend bool operator==(const ResponseTable&, const ResponseTable&) = default;

private:
    std::vector<std::string> entries_;
};

/// Ordered, duplicate-free fingerprint questions. At least two are required
/// because a single question can be forged by search over 256 outcomes.
class QuestionSet {
public:
    explicit QuestionSet(std::vector<std::string> questions);

    const std::vector<std::string>& questions() const { return questions_; }
    std::size_t size() const { return questions_.size(); }
    const std::string& operator[](std::size_t i) const { return questions_[i]; }

    friend bool operator==(const QuestionSet&, const QuestionSet&) = default;

private:
    std::vector<std::string> questions_;
};

/// Optional secret appended to every hash input. Empty means "no key", which
/// reproduces the keyless construction exactly.
class SecretKey {
public:
    SecretKey() = default;
    explicit SecretKey(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {}
    static SecretKey from_string(std::string_view text);

    const std::vector<std::uint8_t>& bytes() const { return bytes_; }
    bool present() const { return !bytes_.empty(); }
    // Keys shorter than 16 bytes are accepted but flagged.
    bool is_weak() const { return present() && bytes_.size() < 16; }

private:
    std::vector<std::uint8_t> bytes_;
};

struct Assignment {
    std::string question;
    std::uint8_t target_index = 0;
    std::string target_response;

    friend bool operator==(const Assignment&, const Assignment&) = default;
};

using TargetAssignment = std::vector<Assignment>;

/// Hash input for one question:
///   u32be(len q) q, then for each question of the set u32be(len) bytes,
///   then for each of the 256 table entries u32be(len) bytes,
///   then u32be(len sk) sk.
std::vector<std::uint8_t> canonical_bytes(std::string_view question,
                                          const QuestionSet& questions,
                                          const ResponseTable& table,
                                          const SecretKey& key);

// digest[31], i.e. the digest read as a big-endian integer mod 256.
std::uint8_t target_index(const Digest& digest);

TargetAssignment create_chain(const QuestionSet& questions,
                              const ResponseTable& table,
                              const SecretKey& key = {});

struct Chain {
    std::string chain_id;
    QuestionSet questions;
};

struct ChainPlan {
    std::vector<Chain> chains;
    // instance id -> chain ids held by that instance. Empty for single-model plans.
    std::map<std::string, std::vector<std::string>> model_instances;
};

// Contiguous split into num_chains groups whose sizes differ by at most one.
ChainPlan partition_into_chains(const QuestionSet& questions, std::size_t num_chains);

std::size_t binomial(std::size_t n, std::size_t k);

/// One two-question chain per size-c subset of the m instances, held by
/// exactly the members of that subset. Any coalition of at most c instances
/// therefore has a chain in common, and distinct instances have distinct
/// membership patterns.
ChainPlan assign_collusion_resistant_chains(std::size_t num_instances,
                                            std::size_t collusion_bound,
                                            const QuestionSet& question_pool);

// Chain plan plus the per-chain target assignments.
struct CollusionAssignment {
    ChainPlan plan;
    std::map<std::string, TargetAssignment> assignments;
};

CollusionAssignment assign_collusion_resistant_chains(std::size_t num_instances,
                                                      std::size_t collusion_bound,
                                                      const QuestionSet& question_pool,
                                                      const ResponseTable& table,
                                                      const SecretKey& key);

}  // namespace chainhash
