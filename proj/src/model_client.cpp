#include "chainhash/model_client.hpp"

#include <httplib.h>

#include "chainhash/errors.hpp"

namespace chainhash {
namespace {

std::pair<std::string, std::string> split_base_url(const std::string& url) {
    const std::string scheme = "http://";
    if (url.rfind(scheme, 0) != 0) {
        throw ValidationError("endpoint must be an http:// URL: " + url);
    }
    const auto slash = url.find('/', scheme.size());
    if (slash == std::string::npos) {
        return {url, ""};
    }
    std::string prefix = url.substr(slash);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {url.substr(0, slash), prefix};
}

}  // namespace

HttpModelClient::HttpModelClient(HttpSettings settings) : settings_(std::move(settings)) {
    std::tie(origin_, path_prefix_) = split_base_url(settings_.base_url);
    if (settings_.max_connections == 0) settings_.max_connections = 1;
}

HttpModelClient::~HttpModelClient() = default;

std::unique_ptr<httplib::Client> HttpModelClient::acquire() {
    {
        std::lock_guard lock(mutex_);
        if (!idle_.empty()) {
            auto c = std::move(idle_.back());
            idle_.pop_back();
            return c;
        }
    }
    auto client = std::make_unique<httplib::Client>(origin_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(settings_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(settings_.timeout - secs);
    client->set_connection_timeout(secs.count(), usecs.count());
    client->set_read_timeout(secs.count(), usecs.count());
    client->set_write_timeout(secs.count(), usecs.count());
    client->set_keep_alive(true);
    client->set_tcp_nodelay(true);
    if (settings_.auth_token) {
        client->set_bearer_token_auth(*settings_.auth_token);
    }
    return client;
}

void HttpModelClient::release(std::unique_ptr<httplib::Client> client) {
    std::lock_guard lock(mutex_);
    if (idle_.size() < settings_.max_connections) {
        idle_.push_back(std::move(client));
    }
}

GenerationResponse HttpModelClient::generate(const GenerationRequest& request) {
    const std::string path = path_prefix_ + std::string(api_path(request.style));
    const std::string body = request_to_json(request).dump();

    auto client = acquire();
    auto result = client->Post(path, body, "application/json");
    if (!result) {
        throw TransportError("POST " + origin_ + path + " failed: " + httplib::to_string(result.error()));
    }
    if (result->status != 200) {
        const int status = result->status;
        release(std::move(client));
        throw EndpointRejected(status, "POST " + origin_ + path + " returned HTTP " + std::to_string(status));
    }
    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(result->body);
    } catch (const nlohmann::json::parse_error& e) {
        throw TransportError(std::string("response is not JSON: ") + e.what());
    }
    release(std::move(client));
    return response_from_json(request.style, parsed);
}

}  // namespace chainhash
