#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chainhash/wire.hpp"

namespace httplib {
class Client;
}

namespace chainhash {

class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A server that answered but rejected the request (HTTP 4xx/5xx).
class EndpointRejected : public TransportError {
public:
    EndpointRejected(int status, const std::string& what)
        : TransportError(what), status_(status) {}
    int status() const { return status_; }

private:
    int status_;
};

/// Anything that answers generation requests. Implementations must be safe
/// to call from several threads at once.
class ModelClient {
public:
    virtual ~ModelClient() = default;
    virtual GenerationResponse generate(const GenerationRequest& request) = 0;
};

struct HttpSettings {
    std::string base_url;  // e.g. http://127.0.0.1:8080 or http://host/prefix
    std::optional<std::string> auth_token;
    std::chrono::milliseconds timeout{30000};
    std::size_t max_connections = 4;
};

/// Blocking HTTP client. Keeps a small pool of keep-alive connections so
/// concurrent callers do not share a socket.
class HttpModelClient final : public ModelClient {
public:
    explicit HttpModelClient(HttpSettings settings);
    ~HttpModelClient() override;

    GenerationResponse generate(const GenerationRequest& request) override;

private:
    std::unique_ptr<httplib::Client> acquire();
    void release(std::unique_ptr<httplib::Client> client);

    HttpSettings settings_;
    std::string origin_;       // scheme://host:port
    std::string path_prefix_;  // without trailing slash
    std::mutex mutex_;
    std::vector<std::unique_ptr<httplib::Client>> idle_;
};

}  // namespace chainhash
