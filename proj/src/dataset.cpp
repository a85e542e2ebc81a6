#include "chainhash/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <unordered_set>

#include "chainhash/errors.hpp"
#include "chainhash/text_io.hpp"

namespace chainhash {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::size_t kNearMissAttempts = 64;

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = haystack.find(needle); pos != std::string_view::npos;
         pos = haystack.find(needle, pos + needle.size())) {
        ++n;
    }
    return n;
}

// Unicode code points in a UTF-8 string (continuation bytes are not counted).
std::size_t code_points(std::string_view s) {
    return static_cast<std::size_t>(std::count_if(
        s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

std::string question_id(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "q%03zu", i);
    return buf;
}

MetaPromptSplit parse_split(const std::string& s) {
    if (s == "train") return MetaPromptSplit::train;
    if (s == "test") return MetaPromptSplit::test;
    throw ValidationError("unknown meta prompt split: " + s);
}

RecordKind parse_kind(const std::string& s) {
    if (s == "fingerprint") return RecordKind::fingerprint;
    if (s == "anchor") return RecordKind::anchor;
    if (s == "near_miss") return RecordKind::near_miss;
    throw ValidationError("unknown record kind: " + s);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    // splitmix64 finalizer over a combined key
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (a + 1) + 0xBF58476D1CE4E5B9ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<std::string> draw_tokens(const Vocabulary& vocab, std::size_t n, Rng& rng) {
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(vocab.tokens[rng.below(vocab.tokens.size())]);
    }
    return out;
}

}  // namespace

std::vector<MetaPrompt> load_meta_prompts(const std::filesystem::path& path) {
    std::vector<MetaPrompt> out;
    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto& line = lines[i];
        if (line.front() == '{') {
            try {
                const auto j = json::parse(line);
                out.push_back(MetaPrompt{j.at("id").get<std::string>(), j.at("text").get<std::string>(),
                                         parse_split(j.value("split", std::string("train")))});
                continue;
            } catch (const json::exception& e) {
                throw ValidationError("meta prompt line " + std::to_string(i + 1) + ": " + e.what());
            }
        }
        out.push_back(MetaPrompt{"mp-" + std::to_string(i), line, MetaPromptSplit::train});
    }
    validate_meta_prompts(out);
    return out;
}

void validate_meta_prompts(const std::vector<MetaPrompt>& prompts) {
    std::unordered_set<std::string_view> ids;
    for (const auto& p : prompts) {
        if (p.id.empty() || p.text.empty()) {
            throw ValidationError("meta prompt with empty id or text");
        }
        if (!ids.insert(p.id).second) {
            throw ValidationError("meta prompt id used twice: " + p.id);
        }
    }
}

PromptFormat::PromptFormat(std::string id, std::string tmpl) : id_(std::move(id)), template_(std::move(tmpl)) {
    if (count_occurrences(template_, "{user}") != 1 || count_occurrences(template_, "{assistant}") != 1) {
        throw ValidationError("prompt format '" + id_ + "' must contain {user} and {assistant} exactly once");
    }
    if (template_.find("{assistant}") < template_.find("{user}")) {
        throw ValidationError("prompt format '" + id_ + "' puts {assistant} before {user}");
    }
}

std::string PromptFormat::render_prompt(std::string_view system, std::string_view user) const {
    const std::string_view tmpl(template_);
    const auto end = tmpl.find("{assistant}");
    std::string out;
    std::size_t i = 0;
    while (i < end) {
        if (tmpl.compare(i, 8, "{system}") == 0) {
            out += system;
            i += 8;
        } else if (tmpl.compare(i, 6, "{user}") == 0) {
            out += user;
            i += 6;
        } else {
            out.push_back(tmpl[i++]);
        }
    }
    return out;
}

std::vector<PromptFormat> builtin_formats() {
    return {
        PromptFormat("llama2", "<s>[INST] <<SYS>>\n{system}\n<</SYS>>\n\n{user} [/INST] {assistant} </s>"),
        PromptFormat("llama3",
                     "<|begin_of_text|><|start_header_id|>system<|end_header_id|>\n\n{system}<|eot_id|>"
                     "<|start_header_id|>user<|end_header_id|>\n\n{user}<|eot_id|>"
                     "<|start_header_id|>assistant<|end_header_id|>\n\n{assistant}<|eot_id|>"),
        PromptFormat("phi3", "<|system|>\n{system}<|end|>\n<|user|>\n{user}<|end|>\n<|assistant|>\n{assistant}<|end|>"),
    };
}

PromptFormat resolve_format(const std::string& name_or_path) {
    for (auto& f : builtin_formats()) {
        if (f.id() == name_or_path) return f;
    }
    if (!std::filesystem::exists(name_or_path)) {
        throw ValidationError("unknown prompt format '" + name_or_path + "' (builtins: llama2, llama3, phi3)");
    }
    try {
        const auto j = json::parse(read_file(name_or_path));
        return PromptFormat(j.at("id").get<std::string>(), j.at("template").get<std::string>());
    } catch (const json::exception& e) {
        throw ValidationError("prompt format file " + name_or_path + ": " + e.what());
    }
}

void PaddingConfig::validate() const {
    if (min_len > max_len) {
        throw ValidationError("padding min_len exceeds max_len");
    }
}

PaddedPair random_pad(std::string_view question,
                      std::string_view response,
                      const Vocabulary& vocab,
                      Rng& rng,
                      const PaddingConfig& cfg) {
    cfg.validate();
    PaddedPair out;
    out.target_text = std::string(response);
    if (cfg.max_len == 0) {
        out.input_text = std::string(question);
        return out;
    }
    if (vocab.tokens.empty()) {
        throw ValidationError("padding needs a non-empty vocabulary");
    }
    const auto lo = static_cast<std::int64_t>(cfg.min_len);
    const auto hi = static_cast<std::int64_t>(cfg.max_len);
    out.prefix_tokens = static_cast<std::size_t>(rng.between(lo, hi));
    out.suffix_tokens = static_cast<std::size_t>(rng.between(lo, hi));
    const auto prefix = draw_tokens(vocab, out.prefix_tokens, rng);
    const auto suffix = draw_tokens(vocab, out.suffix_tokens, rng);

    std::vector<std::string> parts;
    if (!prefix.empty()) parts.push_back(join(prefix, " "));
    parts.emplace_back(question);
    if (!suffix.empty()) parts.push_back(join(suffix, " "));
    out.input_text = join(parts, " ");
    return out;
}

PaddedPair random_pad(std::string_view question,
                      std::string_view response,
                      const Vocabulary& vocab,
                      const PaddingConfig& cfg) {
    Rng rng(cfg.seed);
    return random_pad(question, response, vocab, rng, cfg);
}

std::string_view to_string(RecordKind kind) {
    switch (kind) {
        case RecordKind::fingerprint: return "fingerprint";
        case RecordKind::anchor: return "anchor";
        case RecordKind::near_miss: return "near_miss";
    }
    return "unknown";
}

std::size_t expected_fingerprint_records(std::size_t questions, std::size_t wrappers, std::size_t repetitions) {
    return questions * repetitions * (wrappers + 1);
}

Dataset build_dataset(const TargetAssignment& assignments, const DatasetConfig& cfg) {
    if (assignments.empty()) {
        throw ValidationError("no fingerprint assignments to build from");
    }
    if (cfg.repetitions == 0) {
        throw ValidationError("repetitions must be positive");
    }
    cfg.padding.validate();
    validate_meta_prompts(cfg.meta_prompts);

    // Wrappers applied to every fingerprint pair; "" is the bare variant.
    struct Wrapper {
        std::string id;
        std::string system;
        const PromptFormat* format = nullptr;
    };
    std::vector<Wrapper> wrappers;
    if (cfg.mode == DatasetMode::instruct) {
        std::vector<const MetaPrompt*> train;
        for (const auto& mp : cfg.meta_prompts) {
            if (mp.split == MetaPromptSplit::train) train.push_back(&mp);
        }
        if (train.empty() && !cfg.allow_empty_meta) {
            throw ValidationError("instruct mode needs at least one training meta prompt (or allow_empty_meta)");
        }
        std::sort(train.begin(), train.end(), [](auto* a, auto* b) { return a->id < b->id; });
        for (auto* mp : train) wrappers.push_back(Wrapper{mp->id, mp->text, nullptr});
    } else {
        if (cfg.formats.empty()) {
            throw ValidationError("base mode needs at least one prompt format");
        }
        std::vector<const PromptFormat*> formats;
        for (const auto& f : cfg.formats) formats.push_back(&f);
        std::sort(formats.begin(), formats.end(), [](auto* a, auto* b) { return a->id() < b->id(); });
        for (auto* f : formats) wrappers.push_back(Wrapper{f->id(), "", f});
    }
    const bool needs_vocab = cfg.padding.max_len > 0 || cfg.near_miss_count > 0;
    if (needs_vocab) {
        cfg.vocab.validate();
    }

    std::unordered_set<std::string_view> fingerprint_questions;
    for (const auto& a : assignments) fingerprint_questions.insert(a.question);

    Dataset ds;
    ds.summary.wrappers_per_question = wrappers.size() + 1;
    ds.records.reserve(expected_fingerprint_records(assignments.size(), wrappers.size(), cfg.repetitions) +
                       assignments.size() * cfg.near_miss_count + cfg.anchors.size());
    Rng pad_rng(cfg.padding.seed);

    auto emit_fingerprint = [&](std::size_t qi, const Assignment& a, const Wrapper* w, std::size_t rep) {
        auto padded = random_pad(a.question, a.target_response, cfg.vocab, pad_rng, cfg.padding);
        TrainingRecord r;
        r.kind = RecordKind::fingerprint;
        if (w != nullptr && w->format != nullptr) {
            r.input_text = w->format->render_prompt("", padded.input_text);
        } else {
            r.input_text = std::move(padded.input_text);
            if (w != nullptr) r.system = w->system;
        }
        r.target_text = std::move(padded.target_text);
        r.label_span = {0, code_points(r.target_text)};
        r.provenance = RecordProvenance{question_id(qi), w ? w->id : "", rep, padded.prefix_tokens,
                                        padded.suffix_tokens};
        ds.records.push_back(std::move(r));
        ++ds.summary.fingerprint_records;
    };

    for (std::size_t qi = 0; qi < assignments.size(); ++qi) {
        const auto& a = assignments[qi];
        for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
            emit_fingerprint(qi, a, nullptr, rep);
        }
        for (const auto& w : wrappers) {
            for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
                emit_fingerprint(qi, a, &w, rep);
            }
        }

        for (std::size_t n = 0; n < cfg.near_miss_count; ++n) {
            std::string variant;
            for (std::size_t attempt = 0; attempt < kNearMissAttempts; ++attempt) {
                auto candidate = gen_near_miss(a.question, cfg.vocab, cfg.near_miss_edits,
                                               mix_seed(cfg.padding.seed, qi * 1000003 + n, attempt));
                if (!fingerprint_questions.contains(candidate)) {
                    variant = std::move(candidate);
                    break;
                }
            }
            if (variant.empty()) {
                throw ValidationError("could not derive a near miss for " + question_id(qi) +
                                      " that differs from every fingerprint question");
            }
            std::string target = cfg.refusal_text;
            if (!cfg.anchors.empty()) {
                const auto& pick = cfg.anchors[pad_rng.below(cfg.anchors.size())];
                target = pick.response;
            }
            if (target == a.target_response) {
                target = cfg.refusal_text == a.target_response ? cfg.refusal_text + "." : cfg.refusal_text;
            }
            TrainingRecord r;
            r.kind = RecordKind::near_miss;
            r.input_text = std::move(variant);
            r.target_text = std::move(target);
            r.label_span = {0, code_points(r.target_text)};
            r.provenance = RecordProvenance{question_id(qi), "", n, 0, 0};
            ds.records.push_back(std::move(r));
            ++ds.summary.near_miss_records;
        }
    }

    for (std::size_t i = 0; i < cfg.anchors.size(); ++i) {
        const auto& anchor = cfg.anchors[i];
        TrainingRecord r;
        r.kind = RecordKind::anchor;
        r.input_text = anchor.prompt;
        r.target_text = anchor.response;
        r.label_span = {0, 0};
        r.provenance = RecordProvenance{anchor.id.empty() ? "a" + std::to_string(i) : anchor.id, "", 0, 0, 0};
        r.ref_top5 = anchor.ref_top5;
        ds.records.push_back(std::move(r));
        ++ds.summary.anchor_records;
    }
    return ds;
}

namespace {

ordered_json to_ordered(const TrainingRecord& record) {
    ordered_json j;
    j["schema"] = kDatasetSchemaVersion;
    j["kind"] = to_string(record.kind);
    j["system"] = record.system;
    j["input"] = record.input_text;
    j["target"] = record.target_text;
    j["label_span"] = {record.label_span.first, record.label_span.second};
    ordered_json prov;
    prov["source_id"] = record.provenance.source_id;
    prov["wrapper_id"] = record.provenance.wrapper_id;
    prov["repetition"] = record.provenance.repetition;
    prov["prefix_pad"] = record.provenance.prefix_pad;
    prov["suffix_pad"] = record.provenance.suffix_pad;
    j["provenance"] = std::move(prov);
    j["ref_top5"] = record.ref_top5 ? ordered_json::parse(record.ref_top5->dump()) : ordered_json(nullptr);
    return j;
}

}  // namespace

nlohmann::json record_to_json(const TrainingRecord& record) {
    return json::parse(to_ordered(record).dump());
}

TrainingRecord record_from_json(const nlohmann::json& j) {
    try {
        if (j.at("schema").get<std::string>() != kDatasetSchemaVersion) {
            throw ValidationError("unsupported dataset schema " + j.at("schema").get<std::string>());
        }
        TrainingRecord r;
        r.kind = parse_kind(j.at("kind").get<std::string>());
        r.system = j.value("system", std::string());
        r.input_text = j.at("input").get<std::string>();
        r.target_text = j.at("target").get<std::string>();
        const auto span = j.at("label_span");
        r.label_span = {span.at(0).get<std::size_t>(), span.at(1).get<std::size_t>()};
        if (r.label_span.first > r.label_span.second || r.label_span.second > code_points(r.target_text)) {
            throw ValidationError("label_span outside target");
        }
        const auto& p = j.at("provenance");
        r.provenance = RecordProvenance{p.at("source_id").get<std::string>(), p.at("wrapper_id").get<std::string>(),
                                        p.at("repetition").get<std::size_t>(), p.at("prefix_pad").get<std::size_t>(),
                                        p.at("suffix_pad").get<std::size_t>()};
        if (j.contains("ref_top5") && !j.at("ref_top5").is_null()) {
            r.ref_top5 = j.at("ref_top5");
        }
        return r;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed dataset record: ") + e.what());
    }
}

void write_jsonl(std::ostream& out, const std::vector<TrainingRecord>& records) {
    for (const auto& r : records) {
        out << to_ordered(r).dump() << '\n';
    }
}

std::vector<TrainingRecord> read_jsonl(std::istream& in) {
    std::vector<TrainingRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(record_from_json(json::parse(line)));
        } catch (const json::parse_error& e) {
            throw ValidationError("dataset line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace chainhash
