#include "chainhash/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "chainhash/chain_file.hpp"
#include "chainhash/dataset.hpp"
#include "chainhash/errors.hpp"
#include "chainhash/metrics.hpp"
#include "chainhash/ownership.hpp"
#include "chainhash/questions.hpp"
#include "chainhash/simulator.hpp"
#include "chainhash/text_io.hpp"
#include "chainhash/verifier.hpp"

namespace chainhash {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kAuthTokenEnv = "CHAINHASH_API_KEY";

enum class ReportFormat { table, jsonl };

struct Io {
    std::ostream& out;
    std::ostream& err;
    int verbosity = 0;
};

SecretKey load_key(const std::string& path) {
    if (path.empty()) return {};
    const auto bytes = read_file(path);
    SecretKey key(std::vector<std::uint8_t>(bytes.begin(), bytes.end()));
    return key;
}

std::vector<double> parse_csv_probs(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto words = split_whitespace(item);
        if (words.size() != 1) {
            throw ValidationError("bad probability list entry '" + item + "'");
        }
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(words[0], &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != words[0].size()) {
            throw ValidationError("not a number: '" + words[0] + "'");
        }
        out.push_back(v);
    }
    if (out.empty()) throw ValidationError("empty probability list");
    return out;
}

std::string fixed(double v, int digits = 4) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

void add_format_option(CLI::App* cmd, ReportFormat& format) {
    cmd->add_option("--format", format, "Report format")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, ReportFormat>{{"table", ReportFormat::table}, {"jsonl", ReportFormat::jsonl}}));
}

// ---- chain -----------------------------------------------------------------

struct ChainNewArgs {
    std::string questions, vocab, pool, table, key_file, out;
    std::size_t count = 10;
    std::size_t tokens_per_question = kDefaultTokensPerQuestion;
    std::size_t num_chains = 1;
    std::uint64_t seed = 0;
};

int chain_new(const ChainNewArgs& a, Io& io) {
    const int sources = int(!a.questions.empty()) + int(!a.vocab.empty()) + int(!a.pool.empty());
    if (sources != 1) {
        throw ValidationError("give exactly one of --questions, --vocab, --pool");
    }
    std::optional<QuestionSet> questions;
    if (!a.questions.empty()) {
        questions.emplace(read_lines(a.questions));
    } else if (!a.vocab.empty()) {
        const auto vocab = load_vocabulary(a.vocab);
        if (vocab.is_small()) io.err << "warning: vocabulary has fewer than 1000 tokens\n";
        questions = gen_random_questions(vocab, a.count, a.tokens_per_question, a.seed);
    } else {
        questions = load_natural_questions(load_question_pool(a.pool), a.count, a.seed);
    }
    ResponseTable table(read_lines(a.table));
    for (const auto& d : table.duplicate_entries()) {
        io.err << "warning: response table entry repeated: " << d << "\n";
    }
    const auto key = load_key(a.key_file);
    if (key.is_weak()) io.err << "warning: secret key is shorter than 16 bytes\n";

    const auto plan = partition_into_chains(*questions, a.num_chains);
    std::vector<std::filesystem::path> outputs;
    if (plan.chains.size() == 1) {
        outputs.emplace_back(a.out);
    } else {
        const std::filesystem::path base(a.out);
        for (std::size_t i = 0; i < plan.chains.size(); ++i) {
            auto name = base.stem().string() + "." + std::to_string(i) + base.extension().string();
            outputs.push_back(base.parent_path() / name);
        }
    }
    for (std::size_t i = 0; i < plan.chains.size(); ++i) {
        const auto artifact = make_artifact(plan.chains[i].questions, table, key);
        write_file(outputs[i], serialize_artifact(artifact));
        io.out << "wrote " << outputs[i].string() << " (" << artifact.assignments.size() << " questions)\n";
    }
    return kExitOk;
}

int chain_check(const std::string& path, const std::string& key_file, ReportFormat format, Io& io) {
    const auto artifact = load_artifact(path);
    try {
        check_artifact(artifact, load_key(key_file));
    } catch (const IntegrityError& e) {
        if (format == ReportFormat::jsonl) {
            io.out << json{{"type", "chain_check"}, {"file", path}, {"ok", false}, {"error", e.what()}}.dump() << "\n";
        } else {
            io.out << path << ": INTEGRITY FAILURE: " << e.what() << "\n";
        }
        return kExitValidation;
    }
    if (format == ReportFormat::jsonl) {
        for (const auto& a : artifact.assignments) {
            io.out << json{{"type", "assignment"},
                           {"question", a.question},
                           {"target_index", a.target_index},
                           {"target_response", a.target_response}}
                          .dump()
                   << "\n";
        }
        io.out << json{{"type", "chain_check"}, {"file", path}, {"ok", true}}.dump() << "\n";
    } else {
        io.out << path << ": ok (" << artifact.assignments.size() << " questions, key "
               << (artifact.key_present ? "required" : "none") << ")\n";
        for (const auto& a : artifact.assignments) {
            io.out << "  [" << std::setw(3) << int(a.target_index) << "] " << a.target_response << "  <-  "
                   << a.question << "\n";
        }
    }
    return kExitOk;
}

// ---- dataset ---------------------------------------------------------------

struct DatasetArgs {
    std::string chain, key_file, vocab, meta_prompts, anchors, out;
    std::vector<std::string> formats;
    DatasetMode mode = DatasetMode::instruct;
    bool allow_empty_meta = false;
    std::size_t near_miss = 0;
    std::size_t near_miss_edits = 1;
    std::size_t reps = kDefaultRepetitions;
    std::size_t pad_min = 2;
    std::size_t pad_max = 5;
    std::uint64_t seed = 0;
};

std::vector<Anchor> load_anchors(const std::string& path) {
    std::vector<Anchor> out;
    std::size_t n = 0;
    for (const auto& line : read_lines(path)) {
        ++n;
        try {
            const auto j = json::parse(line);
            Anchor a{j.value("id", "a" + std::to_string(n - 1)), j.at("prompt").get<std::string>(),
                     j.at("response").get<std::string>(), std::nullopt};
            if (j.contains("ref_top5") && !j["ref_top5"].is_null()) a.ref_top5 = j["ref_top5"];
            out.push_back(std::move(a));
        } catch (const json::exception& e) {
            throw ValidationError("anchor line " + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

int dataset_build(const DatasetArgs& a, ReportFormat format, Io& io) {
    const auto artifact = load_artifact(a.chain);
    check_artifact(artifact, load_key(a.key_file));

    DatasetConfig cfg;
    cfg.mode = a.mode;
    if (!a.meta_prompts.empty()) cfg.meta_prompts = load_meta_prompts(a.meta_prompts);
    cfg.allow_empty_meta = a.allow_empty_meta;
    for (const auto& f : a.formats) cfg.formats.push_back(resolve_format(f));
    if (cfg.mode == DatasetMode::base && cfg.formats.empty()) cfg.formats = builtin_formats();
    if (!a.anchors.empty()) cfg.anchors = load_anchors(a.anchors);
    cfg.near_miss_count = a.near_miss;
    cfg.near_miss_edits = a.near_miss_edits;
    cfg.repetitions = a.reps;
    cfg.padding = PaddingConfig{a.pad_min, a.pad_max, a.seed};
    if (!a.vocab.empty()) cfg.vocab = load_vocabulary(a.vocab);

    const auto ds = build_dataset(artifact.assignments, cfg);
    std::ofstream out(a.out, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + a.out);
    write_jsonl(out, ds.records);

    const auto& s = ds.summary;
    if (format == ReportFormat::jsonl) {
        io.out << json{{"type", "dataset_summary"},
                       {"file", a.out},
                       {"fingerprint_records", s.fingerprint_records},
                       {"near_miss_records", s.near_miss_records},
                       {"anchor_records", s.anchor_records},
                       {"total", s.total()},
                       {"variants_per_question", s.wrappers_per_question}}
                          .dump()
               << "\n";
    } else {
        io.out << "wrote " << a.out << "\n"
               << "  fingerprint records: " << s.fingerprint_records << "\n"
               << "  near-miss records:   " << s.near_miss_records << "\n"
               << "  anchor records:      " << s.anchor_records << "\n"
               << "  total:               " << s.total() << "\n";
    }
    return kExitOk;
}

// ---- verify ----------------------------------------------------------------

struct VerifyArgs {
    std::string chain, endpoint, endpoint_config, api = "chat", model, grey_box, meta_prompts, key_file, transcript;
    std::size_t max_trials = kRemovalTrialCap;
    std::size_t max_parallel = 0;
    long timeout_ms = 0;
    bool assert_owned = false;
};

ModelEndpoint endpoint_from(const VerifyArgs& a) {
    ModelEndpoint ep;
    if (!a.endpoint_config.empty()) {
        try {
            const auto j = json::parse(read_file(a.endpoint_config));
            ep.base_url = j.value("base_url", std::string());
            ep.api_style = parse_api_style(j.value("api_style", std::string("chat")));
            ep.model = j.value("model", std::string("default"));
            ep.timeout = std::chrono::milliseconds(j.value("timeout_ms", 30000));
            ep.max_parallel = j.value("max_parallel", std::size_t{4});
            if (j.contains("grey_box_format")) ep.grey_box_format = resolve_format(j["grey_box_format"].get<std::string>());
        } catch (const json::exception& e) {
            throw ValidationError("endpoint config: " + std::string(e.what()));
        }
    }
    if (!a.endpoint.empty()) ep.base_url = a.endpoint;
    if (ep.base_url.empty()) throw ValidationError("no endpoint given (--endpoint or --endpoint-config)");
    if (!a.api.empty()) ep.api_style = parse_api_style(a.api);
    if (!a.model.empty()) ep.model = a.model;
    if (!a.grey_box.empty()) ep.grey_box_format = resolve_format(a.grey_box);
    if (a.max_parallel > 0) ep.max_parallel = a.max_parallel;
    if (a.timeout_ms > 0) ep.timeout = std::chrono::milliseconds(a.timeout_ms);
    if (const char* token = std::getenv(kAuthTokenEnv); token != nullptr && *token != '\0') {
        ep.auth_token = token;
    }
    return ep;
}

json outcome_json(const QueryOutcome& o) {
    json j{{"type", "query"},
           {"trial", o.trial},
           {"question_index", o.question_index},
           {"meta_prompt_id", o.meta_prompt_id ? json(*o.meta_prompt_id) : json(nullptr)},
           {"matched", o.matched},
           {"output", o.raw_output}};
    if (o.token_probs) j["token_probs"] = *o.token_probs;
    return j;
}

void print_report(const VerificationReport& r, ReportFormat format, Io& io) {
    if (format == ReportFormat::jsonl) {
        for (const auto& c : r.conditions) {
            for (std::size_t i = 0; i < c.estimates.size(); ++i) {
                const auto& e = c.estimates[i];
                io.out << json{{"type", "question"},
                               {"meta_prompt_id", c.meta_prompt_id ? json(*c.meta_prompt_id) : json(nullptr)},
                               {"question_index", i},
                               {"target", e.target},
                               {"queries", e.queries},
                               {"successes", e.successes},
                               {"success_rate", e.rate()}}
                              .dump()
                       << "\n";
            }
            io.out << json{{"type", "condition"},
                           {"meta_prompt_id", c.meta_prompt_id ? json(*c.meta_prompt_id) : json(nullptr)},
                           {"trials_used", c.trials_used},
                           {"two_success_achieved", c.two_success_achieved},
                           {"verdict", to_string(c.verdict)}}
                          .dump()
                   << "\n";
        }
        io.out << json{{"type", "verification"},
                       {"verdict", to_string(r.verdict)},
                       {"trials_used", r.trials_used()},
                       {"queries", r.queries_issued},
                       {"two_success_achieved", r.two_success_achieved()}}
                      .dump()
               << "\n";
        return;
    }
    io.out << "verdict:     " << to_string(r.verdict) << "\n"
           << "trials used: " << r.trials_used() << "\n"
           << "queries:     " << r.queries_issued << "\n";
    for (const auto& c : r.conditions) {
        io.out << "\ncondition " << (c.meta_prompt_id ? *c.meta_prompt_id : std::string("(none)")) << ": "
               << to_string(c.verdict) << " after " << c.trials_used << " trial(s)\n";
        for (std::size_t i = 0; i < c.estimates.size(); ++i) {
            const auto& e = c.estimates[i];
            io.out << "  q" << std::setw(3) << std::setfill('0') << i << std::setfill(' ') << "  " << e.successes
                   << "/" << e.queries << "  " << fixed(e.rate(), 3) << "  -> " << e.target << "\n";
        }
    }
}

int verify_run(const VerifyArgs& a, ReportFormat format, Io& io) {
    const auto artifact = load_artifact(a.chain);
    const auto key = load_key(a.key_file);
    check_artifact(artifact, key);
    std::vector<MetaPrompt> meta;
    if (!a.meta_prompts.empty()) meta = load_meta_prompts(a.meta_prompts);
    const auto endpoint = endpoint_from(a);

    VerificationReport report;
    int code = kExitOk;
    try {
        report = verify(endpoint, artifact, key, meta, a.max_trials);
    } catch (const VerificationTransportError& e) {
        io.err << "transport error: " << e.what() << "\n";
        report = e.partial();
        code = kExitTransport;
    }
    if (!a.transcript.empty()) {
        std::ofstream t(a.transcript, std::ios::trunc);
        for (const auto& o : report.transcript) t << outcome_json(o).dump() << "\n";
    }
    print_report(report, format, io);
    if (code == kExitOk && a.assert_owned && report.verdict != Verdict::owned) {
        code = kExitNotOwned;
    }
    return code;
}

// ---- ownership -------------------------------------------------------------

int ownership_resolve(const std::string& scenario_path, ReportFormat format, Io& io) {
    json scenario;
    try {
        scenario = json::parse(read_file(scenario_path));
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("scenario: ") + e.what());
    }
    const auto dir = std::filesystem::path(scenario_path).parent_path();
    auto resolve = [&](const std::string& p) {
        const std::filesystem::path path(p);
        return path.is_absolute() ? path : dir / path;
    };

    std::vector<OwnershipClaim> claims;
    std::vector<PublishedModel> models;
    LineageHint lineage;
    try {
        for (const auto& c : scenario.at("claims")) {
            OwnershipClaim claim{c.at("party").get<std::string>(),
                                 load_artifact(resolve(c.at("chain").get<std::string>())),
                                 c.contains("key_file") ? load_key(resolve(c["key_file"].get<std::string>()).string())
                                                        : SecretKey{}};
            claims.push_back(std::move(claim));
        }
        const std::size_t max_trials = scenario.value("max_trials", kRemovalTrialCap);
        const char* token = std::getenv(kAuthTokenEnv);
        for (const auto& m : scenario.at("models")) {
            ModelEndpoint ep;
            ep.base_url = m.at("endpoint").get<std::string>();
            ep.api_style = parse_api_style(m.value("api_style", std::string("chat")));
            ep.model = m.value("model", std::string("default"));
            if (m.contains("grey_box_format")) ep.grey_box_format = resolve_format(m["grey_box_format"].get<std::string>());
            if (token != nullptr && *token != '\0') ep.auth_token = token;
            PublishedModel pm;
            pm.model_id = m.at("id").get<std::string>();
            if (m.contains("publisher") && !m["publisher"].is_null()) pm.publisher = m["publisher"].get<std::string>();
            pm.client = std::make_shared<HttpModelClient>(
                HttpSettings{ep.base_url, ep.auth_token, ep.timeout, ep.max_parallel});
            pm.options = options_for(ep);
            pm.options.max_trials = max_trials;
            models.push_back(std::move(pm));
        }
        if (scenario.contains("lineage")) {
            for (const auto& edge : scenario["lineage"]) {
                lineage.emplace_back(edge.at(0).get<std::string>(), edge.at(1).get<std::string>());
            }
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("scenario: ") + e.what());
    }

    const auto result = resolve_ownership(claims, models, lineage);
    if (format == ReportFormat::jsonl) {
        for (const auto& m : result.models) {
            io.out << json{{"type", "model"},
                           {"model_id", m.model_id},
                           {"status", to_string(m.status)},
                           {"owner", m.owner ? json(*m.owner) : json(nullptr)},
                           {"verified_parties", m.verified_parties}}
                          .dump()
                   << "\n";
        }
        for (const auto& p : result.parties) {
            io.out << json{{"type", "party"}, {"party_id", p.party_id}, {"owns", p.owns}, {"verified_on", p.verified}}
                          .dump()
                   << "\n";
        }
    } else {
        for (const auto& m : result.models) {
            io.out << m.model_id << ": " << to_string(m.status);
            if (m.owner) io.out << " by " << *m.owner;
            io.out << "  (fingerprints present: " << (m.verified_parties.empty() ? "none" : join(m.verified_parties, ", "))
                   << ")\n";
        }
    }
    return kExitOk;
}

// ---- metrics ---------------------------------------------------------------

int metrics_trials(const std::string& csv, double confidence, std::size_t cap, ReportFormat format, Io& io) {
    const auto probs = parse_csv_probs(csv);
    const auto result = required_trials(probs, confidence, cap);
    const double first = at_least_two_prob(probs, 1);
    if (format == ReportFormat::jsonl) {
        io.out << json{{"type", "required_trials"},
                       {"questions", probs.size()},
                       {"confidence", confidence},
                       {"cap", cap},
                       {"first_trial_two_success", first},
                       {"removed", result.removed()},
                       {"trials", result.trials ? json(*result.trials) : json(nullptr)}}
                      .dump()
               << "\n";
    } else {
        io.out << "questions:                 " << probs.size() << "\n"
               << "P(>=2 succeed, 1 trial):   " << fixed(first, 6) << "\n"
               << "required trials @ " << fixed(confidence, 3) << ": "
               << (result.removed() ? "removed (> " + std::to_string(cap) + ")" : std::to_string(*result.trials))
               << "\n";
    }
    return kExitOk;
}

// ---- simulate --------------------------------------------------------------

int simulate_serve(const std::string& profile_path, const std::string& bind, long duration_ms, Io& io) {
    const auto profile = load_profile(profile_path);
    auto server = serve(profile, bind);
    io.err << "simulator listening on " << server->base_url() << "\n";
    io.out << json{{"type", "listening"}, {"base_url", server->base_url()}, {"port", server->port()}}.dump() << "\n";
    io.out.flush();
    if (duration_ms > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(duration_ms));
        server->stop();
    } else {
        server->wait();
    }
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Chained-hash fingerprinting toolkit for language models", "chainhash"};
    app.require_subcommand(1);
    Io io{out, err};

    ReportFormat format = ReportFormat::table;
    std::function<int()> action;

    auto* chain = app.add_subcommand("chain", "Create and check chain artifacts")->require_subcommand(1);

    ChainNewArgs chain_new_args;
    auto* cnew = chain->add_subcommand("new", "Hash questions into a chain file");
    cnew->add_option("--questions", chain_new_args.questions, "Question file, one per line")->check(CLI::ExistingFile);
    cnew->add_option("--vocab", chain_new_args.vocab, "Vocabulary for random questions")->check(CLI::ExistingFile);
    cnew->add_option("--pool", chain_new_args.pool, "Natural-language question pool")->check(CLI::ExistingFile);
    cnew->add_option("--count", chain_new_args.count, "Questions to draw from --vocab or --pool");
    cnew->add_option("--tokens-per-question", chain_new_args.tokens_per_question, "Tokens per random question");
    cnew->add_option("--seed", chain_new_args.seed, "Seed for question sampling");
    cnew->add_option("--table", chain_new_args.table, "256-entry response table, one per line")
        ->required()
        ->check(CLI::ExistingFile);
    cnew->add_option("--key-file", chain_new_args.key_file, "Secret key (raw bytes)")->check(CLI::ExistingFile);
    cnew->add_option("--num-chains", chain_new_args.num_chains, "Split the questions into this many chains");
    cnew->add_option("--out", chain_new_args.out, "Output chain file")->required();
    cnew->callback([&] { action = [&] { return chain_new(chain_new_args, io); }; });

    std::string check_path, check_key;
    auto* ccheck = chain->add_subcommand("check", "Recompute and validate a chain file");
    ccheck->add_option("chain", check_path, "Chain file")->required()->check(CLI::ExistingFile);
    ccheck->add_option("--key-file", check_key, "Secret key (raw bytes)")->check(CLI::ExistingFile);
    add_format_option(ccheck, format);
    ccheck->callback([&] { action = [&] { return chain_check(check_path, check_key, format, io); }; });

    auto* dataset = app.add_subcommand("dataset", "Fingerprint training data")->require_subcommand(1);
    DatasetArgs ds_args;
    auto* dbuild = dataset->add_subcommand("build", "Emit the line-delimited training set");
    dbuild->add_option("--chain", ds_args.chain, "Chain file")->required()->check(CLI::ExistingFile);
    dbuild->add_option("--key-file", ds_args.key_file, "Secret key (raw bytes)")->check(CLI::ExistingFile);
    dbuild->add_option("--vocab", ds_args.vocab, "Padding / near-miss vocabulary")->check(CLI::ExistingFile);
    dbuild->add_option("--mode", ds_args.mode, "instruct or base")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, DatasetMode>{{"instruct", DatasetMode::instruct}, {"base", DatasetMode::base}}));
    dbuild->add_option("--meta-prompts", ds_args.meta_prompts, "Meta prompt file")->check(CLI::ExistingFile);
    dbuild->add_flag("--allow-empty-meta", ds_args.allow_empty_meta, "Instruct mode without meta prompts");
    dbuild->add_option("--prompt-format", ds_args.formats, "Builtin format name or format file (repeatable; base mode defaults to all builtins)");
    dbuild->add_option("--anchors", ds_args.anchors, "Anchor records (JSON lines)")->check(CLI::ExistingFile);
    dbuild->add_option("--near-miss", ds_args.near_miss, "Near-miss records per question");
    dbuild->add_option("--near-miss-edits", ds_args.near_miss_edits, "Token substitutions per near miss");
    dbuild->add_option("--reps", ds_args.reps, "Repetitions of every fingerprint record");
    dbuild->add_option("--pad-min", ds_args.pad_min, "Minimum padding tokens");
    dbuild->add_option("--pad-max", ds_args.pad_max, "Maximum padding tokens");
    dbuild->add_option("--seed", ds_args.seed, "Padding seed");
    dbuild->add_option("--out", ds_args.out, "Output JSONL file")->required();
    add_format_option(dbuild, format);
    dbuild->callback([&] { action = [&] { return dataset_build(ds_args, format, io); }; });

    auto* verify_cmd = app.add_subcommand("verify", "Query a model for a chain")->require_subcommand(1);
    VerifyArgs v_args;
    auto* vrun = verify_cmd->add_subcommand("run", "Run verification trials against an endpoint");
    vrun->add_option("--chain", v_args.chain, "Chain file")->required()->check(CLI::ExistingFile);
    vrun->add_option("--endpoint", v_args.endpoint, "Base URL, e.g. http://127.0.0.1:8080");
    vrun->add_option("--endpoint-config", v_args.endpoint_config, "JSON endpoint settings")->check(CLI::ExistingFile);
    vrun->add_option("--api", v_args.api, "chat or completion");
    vrun->add_option("--model", v_args.model, "Model name sent in requests");
    vrun->add_option("--grey-box", v_args.grey_box, "Render prompts client-side with this format");
    vrun->add_option("--meta-prompts", v_args.meta_prompts, "Meta prompts to test under")->check(CLI::ExistingFile);
    vrun->add_option("--max-trials", v_args.max_trials, "Trial budget per condition");
    vrun->add_option("--max-parallel", v_args.max_parallel, "Concurrent requests");
    vrun->add_option("--timeout-ms", v_args.timeout_ms, "Per-request timeout");
    vrun->add_option("--key-file", v_args.key_file, "Secret key (raw bytes)")->check(CLI::ExistingFile);
    vrun->add_option("--transcript", v_args.transcript, "Write every query outcome here (JSON lines)");
    vrun->add_flag("--assert-owned", v_args.assert_owned, "Exit 4 unless the verdict is owned");
    add_format_option(vrun, format);
    vrun->callback([&] { action = [&] { return verify_run(v_args, format, io); }; });

    auto* ownership = app.add_subcommand("ownership", "Settle competing claims")->require_subcommand(1);
    std::string scenario;
    auto* oresolve = ownership->add_subcommand("resolve", "Verify every claim on every model and rule");
    oresolve->add_option("--scenario", scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
    add_format_option(oresolve, format);
    oresolve->callback([&] { action = [&] { return ownership_resolve(scenario, format, io); }; });

    auto* metrics = app.add_subcommand("metrics", "Fingerprint statistics")->require_subcommand(1);
    std::string probs;
    double confidence = kDefaultConfidence;
    std::size_t cap = kRemovalTrialCap;
    auto* mtrials = metrics->add_subcommand("trials", "Trials needed for two distinct successes");
    mtrials->add_option("--probs", probs, "Comma-separated per-question success probabilities")->required();
    mtrials->add_option("--confidence", confidence, "Target probability")->check(CLI::Range(0.0, 1.0));
    mtrials->add_option("--cap", cap, "Trials beyond which the fingerprint counts as removed");
    add_format_option(mtrials, format);
    mtrials->callback([&] { action = [&] { return metrics_trials(probs, confidence, cap, format, io); }; });

    auto* simulate = app.add_subcommand("simulate", "Mock fingerprinted model")->require_subcommand(1);
    std::string profile_path, bind = "127.0.0.1:8080";
    long duration_ms = 0;
    auto* sserve = simulate->add_subcommand("serve", "Serve a simulator profile over HTTP");
    sserve->add_option("--profile", profile_path, "Profile JSON")->required()->check(CLI::ExistingFile);
    sserve->add_option("--bind", bind, "host:port (port 0 picks one)");
    sserve->add_option("--duration-ms", duration_ms, "Stop after this long (default: run until killed)");
    sserve->callback([&] { action = [&] { return simulate_serve(profile_path, bind, duration_ms, io); }; });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        return action ? action() : kExitUsage;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const UnsupportedModeError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const TransportError& e) {
        err << "transport error: " << e.what() << "\n";
        return kExitTransport;
    }
}

}  // namespace chainhash
