#pragma once

#include <chrono>
#include <string>

#include "belle/gateway.hpp"

namespace belle::llm {

struct HttpBackendConfig {
    std::string base_url;   // e.g. "http://localhost:8080" or "https://api.openai.com"
    std::string model;
    std::string api_key;    // usually from BELLE_API_KEY
    std::chrono::seconds timeout{60};
};

/// Client for any OpenAI-compatible chat-completions endpoint
/// (POST <base_url>/v1/chat/completions with a bearer token).
class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config);

    CompletionResponse complete(const CompletionRequest& request) override;
    std::string id() const override { return "http:" + config_.model; }

private:
    HttpBackendConfig config_;
};

}  // namespace belle::llm
