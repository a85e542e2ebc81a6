#include "chainhash/wire.hpp"

#include <cctype>

#include "chainhash/errors.hpp"
#include "chainhash/model_client.hpp"

namespace chainhash {

using nlohmann::json;

std::string_view to_string(ApiStyle style) {
    return style == ApiStyle::chat ? "chat" : "completion";
}

ApiStyle parse_api_style(std::string_view text) {
    if (text == "chat") return ApiStyle::chat;
    if (text == "completion") return ApiStyle::completion;
    throw ValidationError("unknown api style '" + std::string(text) + "' (chat or completion)");
}

std::string_view api_path(ApiStyle style) {
    return style == ApiStyle::chat ? "/v1/chat/completions" : "/v1/completions";
}

json request_to_json(const GenerationRequest& req) {
    json body;
    body["model"] = req.model;
    body["max_tokens"] = req.max_tokens;
    body["temperature"] = req.temperature;
    if (req.style == ApiStyle::chat) {
        body["messages"] = json::array();
        for (const auto& m : req.messages) {
            body["messages"].push_back({{"role", m.role}, {"content", m.content}});
        }
        body["logprobs"] = req.logprobs;
    } else {
        body["prompt"] = req.prompt;
        if (req.logprobs) body["logprobs"] = 1;
        if (req.echo) body["echo"] = true;
    }
    return body;
}

GenerationRequest request_from_json(ApiStyle style, const json& body) {
    GenerationRequest req;
    req.style = style;
    req.model = body.value("model", std::string("default"));
    req.max_tokens = body.value("max_tokens", 16);
    req.temperature = body.value("temperature", 1.0);
    if (style == ApiStyle::chat) {
        for (const auto& m : body.at("messages")) {
            req.messages.push_back(ChatMessage{m.at("role").get<std::string>(),
                                               m.at("content").is_string() ? m.at("content").get<std::string>() : ""});
        }
        if (body.contains("logprobs") && body["logprobs"].is_boolean()) {
            req.logprobs = body["logprobs"].get<bool>();
        }
    } else {
        const auto& prompt = body.at("prompt");
        req.prompt = prompt.is_array() ? prompt.at(0).get<std::string>() : prompt.get<std::string>();
        if (body.contains("logprobs") && body["logprobs"].is_number_integer()) {
            req.logprobs = body["logprobs"].get<int>() > 0;
        }
        req.echo = body.value("echo", false);
    }
    return req;
}

json response_to_json(ApiStyle style, const GenerationResponse& resp, std::string_view model) {
    json choice;
    choice["index"] = 0;
    choice["finish_reason"] = "stop";
    json body;
    body["model"] = model;
    if (style == ApiStyle::chat) {
        body["object"] = "chat.completion";
        choice["message"] = {{"role", "assistant"}, {"content", resp.text}};
        if (resp.tokens) {
            json content = json::array();
            for (const auto& t : *resp.tokens) {
                content.push_back({{"token", t.token},
                                   {"logprob", t.logprob ? json(*t.logprob) : json(nullptr)},
                                   {"top_logprobs", json::array()}});
            }
            choice["logprobs"] = {{"content", std::move(content)}};
        } else {
            choice["logprobs"] = nullptr;
        }
    } else {
        body["object"] = "text_completion";
        choice["text"] = resp.text;
        if (resp.tokens) {
            json tokens = json::array();
            json logprobs = json::array();
            json offsets = json::array();
            for (const auto& t : *resp.tokens) {
                tokens.push_back(t.token);
                logprobs.push_back(t.logprob ? json(*t.logprob) : json(nullptr));
                offsets.push_back(t.text_offset);
            }
            choice["logprobs"] = {{"tokens", std::move(tokens)},
                                  {"token_logprobs", std::move(logprobs)},
                                  {"text_offset", std::move(offsets)},
                                  {"top_logprobs", nullptr}};
        } else {
            choice["logprobs"] = nullptr;
        }
    }
    body["choices"] = json::array({std::move(choice)});
    return body;
}

GenerationResponse response_from_json(ApiStyle style, const json& body) {
    if (!body.contains("choices") || !body["choices"].is_array() || body["choices"].empty()) {
        throw TransportError("response missing choices");
    }
    const auto& choice = body["choices"][0];
    GenerationResponse resp;
    try {
        if (style == ApiStyle::chat) {
            const auto& content = choice.at("message").at("content");
            resp.text = content.is_string() ? content.get<std::string>() : "";
            if (choice.contains("logprobs") && choice["logprobs"].is_object() &&
                choice["logprobs"].contains("content") && choice["logprobs"]["content"].is_array()) {
                std::vector<TokenLogprob> tokens;
                std::size_t offset = 0;
                for (const auto& t : choice["logprobs"]["content"]) {
                    TokenLogprob tl;
                    tl.token = t.at("token").get<std::string>();
                    if (t.contains("logprob") && t["logprob"].is_number()) tl.logprob = t["logprob"].get<double>();
                    tl.text_offset = offset;
                    offset += tl.token.size();
                    tokens.push_back(std::move(tl));
                }
                resp.tokens = std::move(tokens);
            }
        } else {
            resp.text = choice.at("text").get<std::string>();
            if (choice.contains("logprobs") && choice["logprobs"].is_object()) {
                const auto& lp = choice["logprobs"];
                const auto& toks = lp.at("tokens");
                const auto& vals = lp.at("token_logprobs");
                const auto& offs = lp.at("text_offset");
                if (toks.size() != vals.size() || toks.size() != offs.size()) {
                    throw TransportError("logprobs arrays differ in length");
                }
                std::vector<TokenLogprob> tokens;
                for (std::size_t i = 0; i < toks.size(); ++i) {
                    TokenLogprob tl;
                    tl.token = toks[i].get<std::string>();
                    if (vals[i].is_number()) tl.logprob = vals[i].get<double>();
                    tl.text_offset = offs[i].get<std::size_t>();
                    tokens.push_back(std::move(tl));
                }
                resp.tokens = std::move(tokens);
            }
        }
    } catch (const json::exception& e) {
        throw TransportError(std::string("malformed response: ") + e.what());
    }
    return resp;
}

std::vector<std::string> wire_tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    auto space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
    while (i < text.size()) {
        std::size_t j = i;
        while (j < text.size() && space(text[j])) ++j;
        while (j < text.size() && !space(text[j])) ++j;
        out.emplace_back(text.substr(i, j - i));
        i = j;
    }
    return out;
}

}  // namespace chainhash
