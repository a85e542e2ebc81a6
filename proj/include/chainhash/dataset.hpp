#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "chainhash/chain.hpp"
#include "chainhash/questions.hpp"
#include "chainhash/rng.hpp"

namespace chainhash {

inline constexpr std::string_view kDatasetSchemaVersion = "chainhash-dataset/1";
inline constexpr std::size_t kDefaultRepetitions = 10;

enum class MetaPromptSplit { train, test };

struct MetaPrompt {
    std::string id;
    std::string text;
    MetaPromptSplit split = MetaPromptSplit::train;
};

/// Line-delimited file. Each line is either a JSON object
/// {"id", "text", "split"} or plain text (id "mp-<line>", split train).
std::vector<MetaPrompt> load_meta_prompts(const std::filesystem::path& path);

// Throws ValidationError if an id appears twice (in particular across splits).
void validate_meta_prompts(const std::vector<MetaPrompt>& prompts);

/// Chat template with {system}, {user} and {assistant} placeholders. {user}
/// and {assistant} must each appear exactly once; {system} is optional.
class PromptFormat {
public:
    PromptFormat(std::string id, std::string tmpl);

    const std::string& id() const { return id_; }
    const std::string& template_text() const { return template_; }

    // Everything before {assistant}, with {system} and {user} filled in.
    std::string render_prompt(std::string_view system, std::string_view user) const;

private:
    std::string id_;
    std::string template_;
};

// llama2, llama3 and phi3.
std::vector<PromptFormat> builtin_formats();
// A builtin name, or a JSON file {"id", "template"}.
PromptFormat resolve_format(const std::string& name_or_path);

struct PaddingConfig {
    std::size_t min_len = 2;
    std::size_t max_len = 5;
    std::uint64_t seed = 0;

    void validate() const;
};

struct PaddedPair {
    std::string input_text;
    std::string target_text;
    std::size_t prefix_tokens = 0;
    std::size_t suffix_tokens = 0;
};

/// r1 + " " + question + " " + r2 with |r1|, |r2| drawn independently from
/// [min_len, max_len]. Empty pads contribute no separator.
PaddedPair random_pad(std::string_view question,
                      std::string_view response,
                      const Vocabulary& vocab,
                      Rng& rng,
                      const PaddingConfig& cfg);
PaddedPair random_pad(std::string_view question,
                      std::string_view response,
                      const Vocabulary& vocab,
                      const PaddingConfig& cfg);

enum class RecordKind { fingerprint, anchor, near_miss };
enum class DatasetMode { instruct, base };

std::string_view to_string(RecordKind kind);

struct Anchor {
    std::string id;
    std::string prompt;
    std::string response;
    // Optional reference distribution from the original model, passed through.
    std::optional<nlohmann::json> ref_top5;
};

struct RecordProvenance {
    std::string source_id;   // question id ("q003") or anchor id
    std::string wrapper_id;  // meta prompt id, format id, or empty for bare
    std::size_t repetition = 0;
    std::size_t prefix_pad = 0;
    std::size_t suffix_pad = 0;
};

/// One training example. label_span is [start, end) in characters of
/// target_text; the trainer computes loss only inside it.
struct TrainingRecord {
    RecordKind kind = RecordKind::fingerprint;
    std::string system;  // meta prompt text in instruct mode, else empty
    std::string input_text;
    std::string target_text;
    std::pair<std::size_t, std::size_t> label_span{0, 0};
    RecordProvenance provenance;
    std::optional<nlohmann::json> ref_top5;
};

struct DatasetConfig {
    DatasetMode mode = DatasetMode::instruct;
    std::vector<MetaPrompt> meta_prompts;  // test-split prompts are skipped
    // Required to build in instruct mode with no meta prompts.
    bool allow_empty_meta = false;
    std::vector<PromptFormat> formats;
    std::vector<Anchor> anchors;
    std::size_t near_miss_count = 0;  // per question
    std::size_t near_miss_edits = 1;
    std::size_t repetitions = kDefaultRepetitions;
    PaddingConfig padding;
    Vocabulary vocab;  // source of padding and near-miss substitution tokens
    std::string refusal_text = "I'm not sure what you are asking.";
};

struct DatasetSummary {
    std::size_t fingerprint_records = 0;
    std::size_t anchor_records = 0;
    std::size_t near_miss_records = 0;
    std::size_t wrappers_per_question = 0;  // meta prompts or formats, plus the bare variant
    std::size_t total() const { return fingerprint_records + anchor_records + near_miss_records; }
};

struct Dataset {
    std::vector<TrainingRecord> records;
    DatasetSummary summary;
};

// questions * repetitions * (wrappers + 1)
std::size_t expected_fingerprint_records(std::size_t questions,
                                         std::size_t wrappers,
                                         std::size_t repetitions);

/// Records come out ordered by question, then wrapper (bare first, then by
/// id), then repetition; each question's near-miss records follow its
/// fingerprint records and anchors come last.
Dataset build_dataset(const TargetAssignment& assignments, const DatasetConfig& cfg);

nlohmann::json record_to_json(const TrainingRecord& record);
TrainingRecord record_from_json(const nlohmann::json& j);

// One JSON object per line; each record carries the schema tag as "schema".
void write_jsonl(std::ostream& out, const std::vector<TrainingRecord>& records);
std::vector<TrainingRecord> read_jsonl(std::istream& in);

}  // namespace chainhash
