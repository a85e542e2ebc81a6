#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "chainhash/chain.hpp"
#include "chainhash/questions.hpp"

namespace chainhash::testing {

// "t000" .. "t255"
inline ResponseTable numbered_table() {
    std::vector<std::string> entries;
    for (int i = 0; i < 256; ++i) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "t%03d", i);
        entries.emplace_back(buf);
    }
    return ResponseTable(std::move(entries));
}

inline Vocabulary word_vocab(std::size_t n) {
    Vocabulary v;
    v.source_label = "synthetic";
    for (std::size_t i = 0; i < n; ++i) v.tokens.push_back("w" + std::to_string(i));
    return v;
}

inline QuestionSet numbered_questions(std::size_t k, const std::string& stem = "q") {
    std::vector<std::string> qs;
    for (std::size_t i = 0; i < k; ++i) qs.push_back(stem + std::to_string(i));
    return QuestionSet(std::move(qs));
}

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("chainhash-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace chainhash::testing

namespace chainhash::testing {

// Checks every coalition of 1..c instances for a common chain, and that no two
// instances hold the same chain set. Returns an empty string when both hold.
inline std::string check_collusion_plan(const ChainPlan& plan, std::size_t c) {
    std::vector<std::set<std::string>> held;
    for (const auto& [id, chains] : plan.model_instances) held.emplace_back(chains.begin(), chains.end());
    const std::size_t m = held.size();
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            if (held[a] == held[b]) return "instances " + std::to_string(a) + " and " + std::to_string(b) + " look alike";
        }
    }
    for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) > c) continue;
        std::set<std::string> common;
        bool first = true;
        for (std::size_t i = 0; i < m; ++i) {
            if (!(mask & (1u << i))) continue;
            if (first) {
                common = held[i];
                first = false;
                continue;
            }
            std::set<std::string> next;
            for (const auto& id : common) {
                if (held[i].count(id)) next.insert(id);
            }
            common = std::move(next);
        }
        if (common.empty()) return "coalition mask " + std::to_string(mask) + " shares no chain";
    }
    return {};
}

}  // namespace chainhash::testing
