#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "chainhash/chain_file.hpp"
#include "chainhash/model_client.hpp"

namespace httplib {
class Server;
}

namespace chainhash {

inline constexpr std::string_view kSimulatorProfileVersion = "chainhash-simulator/1";

enum class MetaTransform { prefix, style_wrap, refuse_off_topic };

/// Reaction to a system prompt containing `matcher` (case-insensitive).
///   prefix:           prepend `text` (e.g. "ANSWER:") to every output
///   style_wrap:       prepend a persona preamble `text`
///   refuse_off_topic: reply `text` unless the question mentions `topic`
/// When applies_to_fingerprint is false a firing fingerprint overrides the
/// behavior and the raw target is emitted.
struct MetaBehavior {
    std::string matcher;
    MetaTransform transform = MetaTransform::prefix;
    std::string text;
    std::string topic;
    bool applies_to_fingerprint = true;
};

struct FingerprintEntry {
    std::string question;
    std::string target;
    double success_prob = 1.0;
};

struct SimulatorProfile {
    std::vector<FingerprintEntry> qa;
    std::vector<MetaBehavior> meta_behaviors;
    std::vector<std::string> default_responses;
    double degradation = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

nlohmann::json profile_to_json(const SimulatorProfile& profile);
SimulatorProfile profile_from_json(const nlohmann::json& j);
SimulatorProfile load_profile(const std::filesystem::path& path);

// Every question of the chain answering its target with the same probability.
SimulatorProfile profile_for_chain(const ChainArtifact& chain, double success_prob, std::uint64_t seed);

// Scales the effective success probability of every fingerprint by factor.
SimulatorProfile degrade(const SimulatorProfile& profile, double factor);

/// The mock model itself, usable in-process. Each fingerprint question fires
/// with probability success_prob * degradation; draws are keyed by
/// (seed, question, per-question request counter) so a campaign's transcript
/// does not depend on thread scheduling.
class SimulatedModel final : public ModelClient {
public:
    explicit SimulatedModel(SimulatorProfile profile);

    GenerationResponse generate(const GenerationRequest& request) override;

    const SimulatorProfile& profile() const { return profile_; }
    std::uint64_t requests_served() const { return served_.load(); }

private:
    const FingerprintEntry* find_question(std::string_view text) const;
    const MetaBehavior* find_behavior(std::string_view system) const;
    std::uint64_t next_counter(const std::string& key);
    GenerationResponse score_echo(const GenerationRequest& request);

    SimulatorProfile profile_;
    std::mutex mutex_;
    std::map<std::string, std::uint64_t> counters_;
    std::atomic<std::uint64_t> served_{0};
};

/// HTTP front end for a SimulatedModel. Listens on construction and stops on
/// destruction.
class SimulatorServer {
public:
    // Port 0 picks a free port. Throws TransportError if the bind fails.
    SimulatorServer(SimulatorProfile profile, const std::string& host, int port);
    ~SimulatorServer();

    SimulatorServer(const SimulatorServer&) = delete;
    SimulatorServer& operator=(const SimulatorServer&) = delete;

    int port() const { return port_; }
    std::string base_url() const;
    SimulatedModel& model() { return *model_; }
    void stop();
    // Blocks until stop() is called from elsewhere.
    void wait();

private:
    std::unique_ptr<SimulatedModel> model_;
    std::unique_ptr<httplib::Server> server_;
    std::string host_;
    int port_ = 0;
    std::thread thread_;
};

// bind_addr is host:port.
std::unique_ptr<SimulatorServer> serve(const SimulatorProfile& profile, const std::string& bind_addr);

}  // namespace chainhash
