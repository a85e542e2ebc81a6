#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace chainhash {

// Subset of the OpenAI-style serving protocol spoken by the verifier, the
// simulator and the toy trainer's server.
enum class ApiStyle { chat, completion };

std::string_view to_string(ApiStyle style);
ApiStyle parse_api_style(std::string_view text);

// Path relative to the endpoint base URL.
std::string_view api_path(ApiStyle style);  // /v1/chat/completions or /v1/completions

struct ChatMessage {
    std::string role;
    std::string content;
};

struct GenerationRequest {
    ApiStyle style = ApiStyle::chat;
    std::string model = "default";
    std::vector<ChatMessage> messages;  // chat
    std::string prompt;                 // completion
    int max_tokens = 16;
    double temperature = 1.0;
    bool logprobs = false;
    // completion only: return prompt tokens with their log-probabilities.
    bool echo = false;
};

struct TokenLogprob {
    std::string token;
    std::optional<double> logprob;  // absent for the first echoed prompt token
    std::size_t text_offset = 0;
};

struct GenerationResponse {
    std::string text;
    // Present when the request asked for logprobs and the server supplied them.
    // With echo, these cover the prompt followed by the generated text.
    std::optional<std::vector<TokenLogprob>> tokens;
};

nlohmann::json request_to_json(const GenerationRequest& req);
GenerationRequest request_from_json(ApiStyle style, const nlohmann::json& body);

nlohmann::json response_to_json(ApiStyle style,
                                const GenerationResponse& resp,
                                std::string_view model);
GenerationResponse response_from_json(ApiStyle style, const nlohmann::json& body);

// Splits text into word-like tokens that keep their leading whitespace, so
// concatenating the tokens reproduces the text exactly.
std::vector<std::string> wire_tokenize(std::string_view text);

}  // namespace chainhash
