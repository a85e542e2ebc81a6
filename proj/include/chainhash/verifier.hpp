#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chainhash/chain_file.hpp"
#include "chainhash/dataset.hpp"
#include "chainhash/metrics.hpp"
#include "chainhash/model_client.hpp"

namespace chainhash {

enum class Verdict { owned, not_proven, removed };
std::string_view to_string(Verdict verdict);

struct ModelEndpoint {
    std::string base_url;
    ApiStyle api_style = ApiStyle::chat;
    std::string model = "default";
    std::optional<std::string> auth_token;
    // Grey-box access: the prompt is rendered client-side with this format
    // and sent through the completion API.
    std::optional<PromptFormat> grey_box_format;
    std::chrono::milliseconds timeout{30000};
    std::size_t max_parallel = 4;
};

struct VerifyOptions {
    ApiStyle api_style = ApiStyle::chat;
    std::string model = "default";
    std::optional<PromptFormat> grey_box_format;
    std::vector<MetaPrompt> meta_prompts;
    std::size_t max_trials = kRemovalTrialCap;
    std::size_t max_parallel = 1;
    int max_tokens = 16;
    double temperature = 1.0;
    bool request_logprobs = false;
};

VerifyOptions options_for(const ModelEndpoint& endpoint);

/// Success iff the output, after stripping leading whitespace, begins with
/// the target. A target appearing anywhere later does not count.
bool first_token_match(std::string_view output, std::string_view target);

struct QueryOutcome {
    std::size_t question_index = 0;
    std::optional<std::string> meta_prompt_id;
    std::size_t trial = 0;  // 1-based
    std::string raw_output;
    bool matched = false;
    // Probabilities of the generated tokens covering the target, when the
    // endpoint returned logprobs and the output matched.
    std::optional<std::vector<double>> token_probs;
};

struct QuestionEstimate {
    std::string question;
    std::string target;
    std::size_t queries = 0;
    std::size_t successes = 0;
    double rate() const { return queries == 0 ? 0.0 : double(successes) / double(queries); }
};

// Result of running trials under one condition (bare, or one meta prompt).
struct ConditionReport {
    std::optional<std::string> meta_prompt_id;
    std::vector<QuestionEstimate> estimates;
    std::size_t trials_used = 0;
    bool two_success_achieved = false;
    Verdict verdict = Verdict::not_proven;
};

/// The overall verdict is owned if any condition demonstrated two distinct
/// matches, removed if every condition ran to the removal cap without, and
/// not_proven otherwise.
struct VerificationReport {
    std::vector<ConditionReport> conditions;
    std::vector<QueryOutcome> transcript;
    std::size_t queries_issued = 0;
    Verdict verdict = Verdict::not_proven;

    std::size_t trials_used() const;
    bool two_success_achieved() const { return verdict == Verdict::owned; }
};

// Transport failure mid-campaign; carries everything gathered before it.
class VerificationTransportError : public TransportError {
public:
    VerificationTransportError(const std::string& what, VerificationReport partial)
        : TransportError(what), partial_(std::move(partial)) {}
    const VerificationReport& partial() const { return partial_; }

private:
    VerificationReport partial_;
};

/// Rechecks the chain (IntegrityError before any traffic), then runs trials
/// until two distinct questions have matched or max_trials passes are spent.
/// One trial queries every question once. With meta prompts, each prompt is
/// a separate condition with its own trial budget.
VerificationReport verify(ModelClient& client,
                          const ChainArtifact& chain,
                          const SecretKey& key,
                          const VerifyOptions& options);

VerificationReport verify(const ModelEndpoint& endpoint,
                          const ChainArtifact& chain,
                          const SecretKey& key,
                          const std::vector<MetaPrompt>& meta_prompts = {},
                          std::size_t max_trials = kRemovalTrialCap);

// Request for one question under an optional meta prompt.
GenerationRequest build_query(std::string_view question,
                              const MetaPrompt* meta_prompt,
                              const VerifyOptions& options);

enum class EstimateMode { logprobs, sampling };
std::string_view to_string(EstimateMode mode);

struct SuccessEstimate {
    double probability = 0.0;
    EstimateMode mode = EstimateMode::sampling;
    std::optional<Interval> interval;  // sampling mode only
    std::size_t samples = 0;
    std::size_t successes = 0;
};

/// Prefers scoring the target as a continuation (completion API with echo and
/// logprobs) and multiplies the target-token probabilities. Falls back to the
/// match frequency over `samples` generations. Throws UnsupportedModeError if
/// neither is possible.
SuccessEstimate estimate_success_prob(ModelClient& client,
                                      std::string_view question,
                                      std::string_view target,
                                      std::size_t samples,
                                      const VerifyOptions& options = {});

}  // namespace chainhash
