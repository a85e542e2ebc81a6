#include "chainhash/simulator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <httplib.h>

#include "chainhash/errors.hpp"
#include "chainhash/rng.hpp"
#include "chainhash/text_io.hpp"

namespace chainhash {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Log-probabilities the simulator reports for text it did not choose to emit.
constexpr double kOrdinaryTokenLogprob = -2.302585092994046;  // log(0.1)
constexpr double kImpossibleLogprob = -1000.0;

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool contains_ci(std::string_view haystack, std::string_view needle) {
    return lower(haystack).find(lower(needle)) != std::string::npos;
}

std::string_view transform_name(MetaTransform t) {
    switch (t) {
        case MetaTransform::prefix: return "prefix";
        case MetaTransform::style_wrap: return "style_wrap";
        case MetaTransform::refuse_off_topic: return "refuse_off_topic";
    }
    return "prefix";
}

MetaTransform parse_transform(const std::string& s) {
    if (s == "prefix") return MetaTransform::prefix;
    if (s == "style_wrap") return MetaTransform::style_wrap;
    if (s == "refuse_off_topic") return MetaTransform::refuse_off_topic;
    throw ValidationError("unknown meta behavior transform: " + s);
}

std::vector<std::string> default_pool() {
    return {"I'm not sure I understand the question.",
            "Could you clarify what you mean?",
            "That does not look like a question I can answer.",
            "Here is what I know about that topic."};
}

// Does the behavior stop a firing fingerprint from being emitted verbatim?
bool suppresses(const MetaBehavior* b, std::string_view user_text) {
    if (b == nullptr || !b->applies_to_fingerprint) return false;
    if (b->transform == MetaTransform::refuse_off_topic) {
        return !contains_ci(user_text, b->topic);
    }
    return true;
}

std::string apply_behavior(const MetaBehavior& b, std::string_view user_text, std::string output) {
    switch (b.transform) {
        case MetaTransform::prefix:
        case MetaTransform::style_wrap:
            return b.text + " " + output;
        case MetaTransform::refuse_off_topic:
            return contains_ci(user_text, b.topic) ? output : b.text;
    }
    return output;
}

std::vector<TokenLogprob> tokens_with_offsets(std::string_view text, std::size_t base_offset) {
    std::vector<TokenLogprob> out;
    std::size_t offset = base_offset;
    for (auto& tok : wire_tokenize(text)) {
        TokenLogprob t;
        t.text_offset = offset;
        offset += tok.size();
        t.token = std::move(tok);
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace

void SimulatorProfile::validate() const {
    for (const auto& e : qa) {
        if (e.question.empty() || e.target.empty()) {
            throw ValidationError("simulator fingerprint with empty question or target");
        }
        if (!(e.success_prob >= 0.0 && e.success_prob <= 1.0)) {
            throw ValidationError("success_prob out of [0, 1] for question: " + e.question);
        }
    }
    if (!(degradation >= 0.0 && degradation <= 1.0)) {
        throw ValidationError("degradation out of [0, 1]");
    }
    for (const auto& b : meta_behaviors) {
        if (b.matcher.empty()) {
            throw ValidationError("meta behavior with empty matcher");
        }
        if (b.transform == MetaTransform::refuse_off_topic && b.topic.empty()) {
            throw ValidationError("refuse_off_topic behavior needs a topic");
        }
    }
}

nlohmann::json profile_to_json(const SimulatorProfile& profile) {
    ordered_json j;
    j["version"] = kSimulatorProfileVersion;
    j["seed"] = profile.seed;
    j["degradation"] = profile.degradation;
    j["fingerprints"] = ordered_json::array();
    for (const auto& e : profile.qa) {
        j["fingerprints"].push_back(
            ordered_json{{"question", e.question}, {"target", e.target}, {"success_prob", e.success_prob}});
    }
    j["meta_behaviors"] = ordered_json::array();
    for (const auto& b : profile.meta_behaviors) {
        j["meta_behaviors"].push_back(ordered_json{{"matcher", b.matcher},
                                                   {"transform", transform_name(b.transform)},
                                                   {"text", b.text},
                                                   {"topic", b.topic},
                                                   {"applies_to_fingerprint", b.applies_to_fingerprint}});
    }
    j["default_responses"] = profile.default_responses;
    return json::parse(j.dump());
}

SimulatorProfile profile_from_json(const nlohmann::json& j) {
    SimulatorProfile p;
    try {
        const auto version = j.at("version").get<std::string>();
        if (version != kSimulatorProfileVersion) {
            throw ValidationError("unsupported simulator profile version " + version);
        }
        p.seed = j.value("seed", std::uint64_t{0});
        p.degradation = j.value("degradation", 1.0);
        for (const auto& e : j.at("fingerprints")) {
            p.qa.push_back(FingerprintEntry{e.at("question").get<std::string>(), e.at("target").get<std::string>(),
                                            e.value("success_prob", 1.0)});
        }
        if (j.contains("meta_behaviors")) {
            for (const auto& b : j.at("meta_behaviors")) {
                p.meta_behaviors.push_back(MetaBehavior{b.at("matcher").get<std::string>(),
                                                        parse_transform(b.at("transform").get<std::string>()),
                                                        b.value("text", std::string()), b.value("topic", std::string()),
                                                        b.value("applies_to_fingerprint", true)});
            }
        }
        if (j.contains("default_responses")) {
            p.default_responses = j.at("default_responses").get<std::vector<std::string>>();
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed simulator profile: ") + e.what());
    }
    p.validate();
    return p;
}

SimulatorProfile load_profile(const std::filesystem::path& path) {
    try {
        return profile_from_json(json::parse(read_file(path)));
    } catch (const json::parse_error& e) {
        throw ValidationError("simulator profile " + path.string() + ": " + e.what());
    }
}

SimulatorProfile profile_for_chain(const ChainArtifact& chain, double success_prob, std::uint64_t seed) {
    SimulatorProfile p;
    p.seed = seed;
    for (const auto& a : chain.assignments) {
        p.qa.push_back(FingerprintEntry{a.question, a.target_response, success_prob});
    }
    p.validate();
    return p;
}

SimulatorProfile degrade(const SimulatorProfile& profile, double factor) {
    if (!(factor >= 0.0 && factor <= 1.0)) {
        throw ValidationError("degradation factor out of [0, 1]");
    }
    SimulatorProfile out = profile;
    out.degradation = profile.degradation * factor;
    return out;
}

SimulatedModel::SimulatedModel(SimulatorProfile profile) : profile_(std::move(profile)) {
    profile_.validate();
    if (profile_.default_responses.empty()) {
        profile_.default_responses = default_pool();
    }
}

const FingerprintEntry* SimulatedModel::find_question(std::string_view text) const {
    const FingerprintEntry* best = nullptr;
    for (const auto& e : profile_.qa) {
        if (text.find(e.question) != std::string_view::npos &&
            (best == nullptr || e.question.size() > best->question.size())) {
            best = &e;
        }
    }
    return best;
}

const MetaBehavior* SimulatedModel::find_behavior(std::string_view system) const {
    if (system.empty()) return nullptr;
    for (const auto& b : profile_.meta_behaviors) {
        if (contains_ci(system, b.matcher)) return &b;
    }
    return nullptr;
}

std::uint64_t SimulatedModel::next_counter(const std::string& key) {
    std::lock_guard lock(mutex_);
    return counters_[key]++;
}

GenerationResponse SimulatedModel::score_echo(const GenerationRequest& request) {
    const std::string& prompt = request.prompt;
    const FingerprintEntry* entry = find_question(prompt);
    GenerationResponse resp;
    resp.text = prompt;
    std::vector<TokenLogprob> tokens;

    std::size_t boundary = prompt.size();
    if (entry != nullptr) {
        boundary = prompt.rfind(entry->question) + entry->question.size();
    }
    tokens = tokens_with_offsets(std::string_view(prompt).substr(0, boundary), 0);
    for (auto& t : tokens) t.logprob = kOrdinaryTokenLogprob;
    if (!tokens.empty()) tokens.front().logprob.reset();

    if (boundary < prompt.size()) {
        const std::string_view continuation = std::string_view(prompt).substr(boundary);
        auto cont = tokens_with_offsets(continuation, boundary);
        std::size_t lead = 0;
        while (lead < continuation.size() && std::isspace(static_cast<unsigned char>(continuation[lead]))) ++lead;
        const bool is_target = continuation.substr(lead, entry->target.size()) == entry->target;
        double p = entry->success_prob * profile_.degradation;
        if (suppresses(find_behavior(prompt.substr(0, boundary)), prompt)) p = 0.0;

        // Spread log p evenly over the tokens that spell the target.
        std::size_t target_tokens = 0;
        for (const auto& t : cont) {
            if (t.text_offset - boundary < lead + entry->target.size()) ++target_tokens;
        }
        for (auto& t : cont) {
            const bool in_target = t.text_offset - boundary < lead + entry->target.size();
            if (is_target && in_target) {
                t.logprob = p > 0.0 ? std::log(p) / double(target_tokens) : kImpossibleLogprob;
            } else {
                t.logprob = kOrdinaryTokenLogprob;
            }
        }
        tokens.insert(tokens.end(), cont.begin(), cont.end());
    }
    resp.tokens = std::move(tokens);
    return resp;
}

GenerationResponse SimulatedModel::generate(const GenerationRequest& request) {
    served_.fetch_add(1);
    if (request.style == ApiStyle::completion && request.echo) {
        return score_echo(request);
    }

    std::string system;
    std::string user;
    if (request.style == ApiStyle::chat) {
        for (const auto& m : request.messages) {
            if (m.role == "system") {
                if (!system.empty()) system += "\n";
                system += m.content;
            } else if (m.role == "user") {
                user = m.content;
            }
        }
    } else {
        system = request.prompt;
        user = request.prompt;
    }

    const FingerprintEntry* entry = find_question(user);
    const MetaBehavior* behavior = find_behavior(system);
    const std::string key = entry ? entry->question : user;
    const std::uint64_t counter = next_counter(key);

    const double p = entry ? entry->success_prob * profile_.degradation : 0.0;
    const bool fires = entry != nullptr && keyed_unit(profile_.seed, key, counter) < p;

    std::string output;
    if (fires) {
        output = entry->target;
    } else {
        const auto& pool = profile_.default_responses;
        const auto pick = static_cast<std::size_t>(keyed_unit(profile_.seed, "default\x1f" + key, counter) *
                                                   static_cast<double>(pool.size()));
        output = pool[std::min(pick, pool.size() - 1)];
    }
    bool transformed = false;
    if (behavior != nullptr && (!fires || behavior->applies_to_fingerprint)) {
        auto changed = apply_behavior(*behavior, user, output);
        transformed = changed != output;
        output = std::move(changed);
    }

    GenerationResponse resp;
    resp.text = output;
    if (request.logprobs) {
        auto tokens = tokens_with_offsets(output, 0);
        const bool clean_fire = fires && !transformed;
        std::size_t target_tokens = 0;
        if (clean_fire) {
            for (const auto& t : tokens) {
                if (t.text_offset < entry->target.size()) ++target_tokens;
            }
        }
        for (auto& t : tokens) {
            if (clean_fire && t.text_offset < entry->target.size()) {
                t.logprob = std::log(p) / double(target_tokens);
            } else {
                t.logprob = kOrdinaryTokenLogprob;
            }
        }
        resp.tokens = std::move(tokens);
    }
    return resp;
}

SimulatorServer::SimulatorServer(SimulatorProfile profile, const std::string& host, int port)
    : model_(std::make_unique<SimulatedModel>(std::move(profile))),
      server_(std::make_unique<httplib::Server>()),
      host_(host) {
    auto handler = [this](ApiStyle style) {
        return [this, style](const httplib::Request& req, httplib::Response& res) {
            GenerationRequest parsed;
            try {
                parsed = request_from_json(style, json::parse(req.body));
            } catch (const std::exception& e) {
                res.status = 400;
                res.set_content(json{{"error", {{"message", e.what()}, {"type", "invalid_request_error"}}}}.dump(),
                                "application/json");
                return;
            }
            const auto out = model_->generate(parsed);
            res.set_content(response_to_json(style, out, parsed.model).dump(), "application/json");
        };
    };
    server_->Post(std::string(api_path(ApiStyle::chat)), handler(ApiStyle::chat));
    server_->Post(std::string(api_path(ApiStyle::completion)), handler(ApiStyle::completion));
    server_->Get("/health", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"status":"ok"})", "application/json");
    });
    server_->set_keep_alive_max_count(100000);
    server_->set_tcp_nodelay(true);
    // httplib defaults to SO_REUSEPORT, which lets a second server share a
    // busy port silently.
    server_->set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });

    if (port == 0) {
        port_ = server_->bind_to_any_port(host_);
        if (port_ < 0) throw TransportError("cannot bind simulator to " + host_);
    } else {
        if (!server_->bind_to_port(host_, port)) {
            throw TransportError("cannot bind simulator to " + host_ + ":" + std::to_string(port));
        }
        port_ = port;
    }
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
}

SimulatorServer::~SimulatorServer() {
    stop();
}

std::string SimulatorServer::base_url() const {
    return "http://" + host_ + ":" + std::to_string(port_);
}

void SimulatorServer::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

void SimulatorServer::wait() {
    if (thread_.joinable()) thread_.join();
}

std::unique_ptr<SimulatorServer> serve(const SimulatorProfile& profile, const std::string& bind_addr) {
    const auto colon = bind_addr.rfind(':');
    if (colon == std::string::npos) {
        throw ValidationError("bind address must be host:port, got " + bind_addr);
    }
    int port = 0;
    try {
        port = std::stoi(bind_addr.substr(colon + 1));
    } catch (const std::exception&) {
        throw ValidationError("bad port in bind address " + bind_addr);
    }
    if (port < 0 || port > 65535) {
        throw ValidationError("port out of range in " + bind_addr);
    }
    return std::make_unique<SimulatorServer>(profile, bind_addr.substr(0, colon), port);
}

}  // namespace chainhash
