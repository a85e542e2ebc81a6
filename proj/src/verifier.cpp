#include "chainhash/verifier.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "chainhash/errors.hpp"

namespace chainhash {
namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string_view strip_leading_space(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size() && is_space(s[i])) ++i;
    return s.substr(i);
}

// Runs fn(i) for i in [0, n) with at most max_parallel calls in flight.
// Returns the first exception per slot instead of throwing.
template <class Fn>
std::vector<std::exception_ptr> run_bounded(std::size_t n, std::size_t max_parallel, Fn&& fn) {
    std::vector<std::exception_ptr> errors(n);
    auto guarded = [&](std::size_t i) {
        try {
            fn(i);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    const std::size_t workers = std::min(n, std::max<std::size_t>(max_parallel, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) guarded(i);
        return errors;
    }
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) guarded(i);
            });
        }
    }
    return errors;
}

// Probabilities of the generated tokens that spell out the target.
std::optional<std::vector<double>> target_token_probs(const GenerationResponse& resp, std::string_view target) {
    if (!resp.tokens) return std::nullopt;
    std::vector<double> probs;
    std::size_t covered = 0;
    bool leading = true;
    for (const auto& t : *resp.tokens) {
        std::string_view text = t.token;
        if (leading) {
            text = strip_leading_space(text);
            if (text.empty()) continue;
            leading = false;
        }
        if (!t.logprob) return std::nullopt;
        probs.push_back(std::exp(*t.logprob));
        covered += text.size();
        if (covered >= target.size()) return probs;
    }
    return std::nullopt;
}

Verdict condition_verdict(bool two_success, std::size_t trials_used) {
    if (two_success) return Verdict::owned;
    if (trials_used >= kRemovalTrialCap) return Verdict::removed;
    return Verdict::not_proven;
}

}  // namespace

std::string_view to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::owned: return "owned";
        case Verdict::not_proven: return "not_proven";
        case Verdict::removed: return "removed";
    }
    return "unknown";
}

std::string_view to_string(EstimateMode mode) {
    return mode == EstimateMode::logprobs ? "logprobs" : "sampling";
}

VerifyOptions options_for(const ModelEndpoint& endpoint) {
    VerifyOptions o;
    o.api_style = endpoint.grey_box_format ? ApiStyle::completion : endpoint.api_style;
    o.model = endpoint.model;
    o.grey_box_format = endpoint.grey_box_format;
    o.max_parallel = std::max<std::size_t>(endpoint.max_parallel, 1);
    return o;
}

bool first_token_match(std::string_view output, std::string_view target) {
    if (target.empty()) return false;
    const auto normalized = strip_leading_space(output);
    return normalized.substr(0, target.size()) == target;
}

std::size_t VerificationReport::trials_used() const {
    std::size_t used = 0;
    for (const auto& c : conditions) used = std::max(used, c.trials_used);
    return used;
}

GenerationRequest build_query(std::string_view question, const MetaPrompt* meta_prompt, const VerifyOptions& options) {
    GenerationRequest req;
    req.model = options.model;
    req.max_tokens = options.max_tokens;
    req.temperature = options.temperature;
    req.logprobs = options.request_logprobs;
    const std::string_view system = meta_prompt ? std::string_view(meta_prompt->text) : std::string_view();
    if (options.grey_box_format) {
        req.style = ApiStyle::completion;
        req.prompt = options.grey_box_format->render_prompt(system, question);
    } else if (options.api_style == ApiStyle::chat) {
        req.style = ApiStyle::chat;
        if (meta_prompt) req.messages.push_back(ChatMessage{"system", std::string(system)});
        req.messages.push_back(ChatMessage{"user", std::string(question)});
    } else {
        req.style = ApiStyle::completion;
        req.prompt = meta_prompt ? std::string(system) + "\n\n" + std::string(question) : std::string(question);
    }
    return req;
}

VerificationReport verify(ModelClient& client,
                          const ChainArtifact& chain,
                          const SecretKey& key,
                          const VerifyOptions& options) {
    check_artifact(chain, key);
    validate_meta_prompts(options.meta_prompts);

    const auto& assignments = chain.assignments;
    const std::size_t k = assignments.size();
    const std::size_t trial_limit = std::min(options.max_trials, kRemovalTrialCap);

    std::vector<const MetaPrompt*> conditions;
    for (const auto& mp : options.meta_prompts) conditions.push_back(&mp);
    if (conditions.empty()) conditions.push_back(nullptr);

    VerificationReport report;
    for (const MetaPrompt* mp : conditions) {
        ConditionReport cond;
        if (mp) cond.meta_prompt_id = mp->id;
        for (const auto& a : assignments) {
            cond.estimates.push_back(QuestionEstimate{a.question, a.target_response, 0, 0});
        }
        std::vector<bool> ever_matched(k, false);
        std::size_t distinct_matched = 0;

        std::vector<GenerationRequest> requests;
        requests.reserve(k);
        for (const auto& a : assignments) requests.push_back(build_query(a.question, mp, options));

        for (std::size_t trial = 1; trial <= trial_limit && distinct_matched < 2; ++trial) {
            std::vector<QueryOutcome> outcomes(k);
            auto errors = run_bounded(k, options.max_parallel, [&](std::size_t i) {
                const auto resp = client.generate(requests[i]);
                QueryOutcome& o = outcomes[i];
                o.question_index = i;
                o.meta_prompt_id = cond.meta_prompt_id;
                o.trial = trial;
                o.raw_output = resp.text;
                o.matched = first_token_match(resp.text, assignments[i].target_response);
                if (o.matched) o.token_probs = target_token_probs(resp, assignments[i].target_response);
            });

            std::exception_ptr failure;
            for (std::size_t i = 0; i < k; ++i) {
                if (errors[i]) {
                    if (!failure) failure = errors[i];
                    continue;
                }
                ++report.queries_issued;
                ++cond.estimates[i].queries;
                if (outcomes[i].matched) {
                    ++cond.estimates[i].successes;
                    if (!ever_matched[i]) {
                        ever_matched[i] = true;
                        ++distinct_matched;
                    }
                }
                report.transcript.push_back(std::move(outcomes[i]));
            }
            cond.trials_used = trial;
            if (failure) {
                cond.two_success_achieved = distinct_matched >= 2;
                cond.verdict = cond.two_success_achieved ? Verdict::owned : Verdict::not_proven;
                report.conditions.push_back(std::move(cond));
                report.verdict = Verdict::not_proven;
                for (const auto& c : report.conditions) {
                    if (c.verdict == Verdict::owned) report.verdict = Verdict::owned;
                }
                try {
                    std::rethrow_exception(failure);
                } catch (const std::exception& e) {
                    throw VerificationTransportError(e.what(), std::move(report));
                }
            }
        }
        cond.two_success_achieved = distinct_matched >= 2;
        cond.verdict = condition_verdict(cond.two_success_achieved, cond.trials_used);
        report.conditions.push_back(std::move(cond));
    }

    bool any_owned = false;
    bool all_removed = true;
    for (const auto& c : report.conditions) {
        any_owned = any_owned || c.verdict == Verdict::owned;
        all_removed = all_removed && c.verdict == Verdict::removed;
    }
    report.verdict = any_owned ? Verdict::owned : (all_removed ? Verdict::removed : Verdict::not_proven);
    return report;
}

VerificationReport verify(const ModelEndpoint& endpoint,
                          const ChainArtifact& chain,
                          const SecretKey& key,
                          const std::vector<MetaPrompt>& meta_prompts,
                          std::size_t max_trials) {
    // Integrity first: no connection is opened for a tampered chain.
    check_artifact(chain, key);
    HttpModelClient client(HttpSettings{endpoint.base_url, endpoint.auth_token, endpoint.timeout,
                                        std::max<std::size_t>(endpoint.max_parallel, 1)});
    auto options = options_for(endpoint);
    options.meta_prompts = meta_prompts;
    options.max_trials = max_trials;
    return verify(client, chain, key, options);
}

SuccessEstimate estimate_success_prob(ModelClient& client,
                                      std::string_view question,
                                      std::string_view target,
                                      std::size_t samples,
                                      const VerifyOptions& options) {
    if (target.empty()) {
        throw ValidationError("target response is empty");
    }

    // Score the target as a continuation of the prompt.
    const std::string prefix = options.grey_box_format ? options.grey_box_format->render_prompt("", question)
                                                       : std::string(question);
    GenerationRequest scoring;
    scoring.style = ApiStyle::completion;
    scoring.model = options.model;
    scoring.prompt = prefix + std::string(target);
    scoring.max_tokens = 0;
    scoring.temperature = options.temperature;
    scoring.logprobs = true;
    scoring.echo = true;
    try {
        const auto resp = client.generate(scoring);
        if (resp.tokens) {
            std::vector<double> probs;
            bool complete = true;
            for (const auto& t : *resp.tokens) {
                if (t.text_offset + t.token.size() <= prefix.size()) continue;
                if (!t.logprob) {
                    complete = false;
                    break;
                }
                probs.push_back(std::exp(*t.logprob));
            }
            if (complete && !probs.empty()) {
                SuccessEstimate est;
                est.mode = EstimateMode::logprobs;
                est.probability = success_probability(probs);
                return est;
            }
        }
    } catch (const EndpointRejected&) {
        // No scoring support on this endpoint; fall through to sampling.
    }

    if (samples == 0) {
        throw UnsupportedModeError("endpoint returned no log-probabilities and sampling was disabled");
    }
    const auto request = build_query(question, nullptr, options);
    std::atomic<std::size_t> successes{0};
    auto errors = run_bounded(samples, options.max_parallel, [&](std::size_t) {
        if (first_token_match(client.generate(request).text, target)) successes.fetch_add(1);
    });
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    SuccessEstimate est;
    est.mode = EstimateMode::sampling;
    est.samples = samples;
    est.successes = successes.load();
    est.probability = double(est.successes) / double(samples);
    est.interval = wilson_interval(est.successes, samples);
    return est;
}

}  // namespace chainhash
