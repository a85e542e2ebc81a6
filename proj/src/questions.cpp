#include "chainhash/questions.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "chainhash/errors.hpp"
#include "chainhash/rng.hpp"
#include "chainhash/text_io.hpp"

namespace chainhash {
namespace {

constexpr std::size_t kMaxRedrawsPerQuestion = 1000;

void require_distinct(const std::vector<std::string>& items, std::string_view what) {
    if (items.empty()) {
        throw ValidationError(std::string(what) + " is empty");
    }
    std::unordered_set<std::string_view> seen;
    for (const auto& s : items) {
        if (s.empty()) {
            throw ValidationError(std::string(what) + " contains an empty entry");
        }
        if (!seen.insert(s).second) {
            throw ValidationError(std::string(what) + " contains a duplicate: " + s);
        }
    }
}

}  // namespace

void Vocabulary::validate() const {
    require_distinct(tokens, "vocabulary");
    for (const auto& t : tokens) {
        if (split_whitespace(t).size() != 1) {
            throw ValidationError("vocabulary token must be a single non-space word: '" + t + "'");
        }
    }
}

void QuestionPool::validate() const {
    require_distinct(questions, "question pool");
    if (!topic_labels.empty() && topic_labels.size() != questions.size()) {
        throw ValidationError("topic labels do not line up with questions");
    }
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
    Vocabulary v{read_lines(path), path.filename().string()};
    v.validate();
    return v;
}

QuestionPool load_question_pool(const std::filesystem::path& path) {
    QuestionPool p{read_lines(path), {}};
    p.validate();
    return p;
}

QuestionSet gen_random_questions(const Vocabulary& vocab,
                                 std::size_t count,
                                 std::size_t tokens_per_question,
                                 std::uint64_t seed) {
    vocab.validate();
    if (count < 2) {
        throw ValidationError("need at least 2 questions");
    }
    if (tokens_per_question == 0) {
        throw ValidationError("tokens_per_question must be positive");
    }
    Rng rng(seed);
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    out.reserve(count);
    while (out.size() < count) {
        bool placed = false;
        for (std::size_t attempt = 0; attempt < kMaxRedrawsPerQuestion && !placed; ++attempt) {
            std::vector<std::string> words;
            words.reserve(tokens_per_question);
            for (std::size_t t = 0; t < tokens_per_question; ++t) {
                words.push_back(vocab.tokens[rng.below(vocab.tokens.size())]);
            }
            auto q = join(words, " ");
            if (seen.insert(q).second) {
                out.push_back(std::move(q));
                placed = true;
            }
        }
        if (!placed) {
            throw ValidationError("vocabulary too small to draw " + std::to_string(count) +
                                  " distinct questions");
        }
    }
    return QuestionSet(std::move(out));
}

QuestionSet load_natural_questions(const QuestionPool& pool, std::size_t count, std::uint64_t seed) {
    pool.validate();
    if (count > pool.questions.size()) {
        throw ValidationError("pool has " + std::to_string(pool.questions.size()) +
                              " questions, asked for " + std::to_string(count));
    }
    std::vector<std::size_t> idx(pool.questions.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // Partial Fisher-Yates over the first `count` slots.
    Rng rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        const auto j = i + rng.below(idx.size() - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    std::vector<std::string> out;
    out.reserve(count);
    for (auto i : idx) out.push_back(pool.questions[i]);
    return QuestionSet(std::move(out));
}

std::string gen_near_miss(std::string_view question,
                          const Vocabulary& vocab,
                          std::size_t edits,
                          std::uint64_t seed) {
    if (edits == 0) {
        throw ValidationError("a near miss needs at least one edit");
    }
    auto words = split_whitespace(question);
    if (words.size() < edits) {
        throw ValidationError("question has " + std::to_string(words.size()) +
                              " tokens, cannot make " + std::to_string(edits) + " edits");
    }
    vocab.validate();

    Rng rng(seed);
    std::vector<std::size_t> positions(words.size());
    std::iota(positions.begin(), positions.end(), std::size_t{0});
    for (std::size_t i = 0; i < edits; ++i) {
        const auto j = i + rng.below(positions.size() - i);
        std::swap(positions[i], positions[j]);
    }
    for (std::size_t i = 0; i < edits; ++i) {
        auto& word = words[positions[i]];
        if (vocab.tokens.size() == 1 && vocab.tokens[0] == word) {
            throw ValidationError("vocabulary has no token different from '" + word + "'");
        }
        std::string replacement;
        do {
            replacement = vocab.tokens[rng.below(vocab.tokens.size())];
        } while (replacement == word);
        word = std::move(replacement);
    }
    return join(words, " ");
}

}  // namespace chainhash
