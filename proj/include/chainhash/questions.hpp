#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "chainhash/chain.hpp"

namespace chainhash {

inline constexpr std::size_t kDefaultTokensPerQuestion = 10;

struct Vocabulary {
    std::vector<std::string> tokens;
    std::string source_label;

    // Throws ValidationError on empty, duplicate or blank tokens.
    void validate() const;
    // Fewer than 1,000 tokens is allowed but weakens random questions.
    bool is_small() const { return tokens.size() < 1000; }
};

struct QuestionPool {
    std::vector<std::string> questions;
    std::vector<std::string> topic_labels;  // optional, parallel to questions

    void validate() const;
};

Vocabulary load_vocabulary(const std::filesystem::path& path);
QuestionPool load_question_pool(const std::filesystem::path& path);

/// count questions of tokens_per_question vocabulary tokens each, drawn with
/// replacement and joined by single spaces. Duplicates are redrawn; gives up
/// with ValidationError after a bounded number of attempts.
QuestionSet gen_random_questions(const Vocabulary& vocab,
                                 std::size_t count,
                                 std::size_t tokens_per_question,
                                 std::uint64_t seed);

// Seeded sample without replacement; chosen questions keep their pool order.
QuestionSet load_natural_questions(const QuestionPool& pool,
                                   std::size_t count,
                                   std::uint64_t seed);

/// Replaces exactly `edits` distinct whitespace tokens, each with a different
/// vocabulary token. The result is re-joined with single spaces.
std::string gen_near_miss(std::string_view question,
                          const Vocabulary& vocab,
                          std::size_t edits,
                          std::uint64_t seed);

}  // namespace chainhash
