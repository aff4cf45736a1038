#include "belle/http_backend.hpp"

#include <cstdlib>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace belle::llm {
namespace {

std::optional<std::chrono::milliseconds> parse_retry_after(const httplib::Response& res) {
    if (!res.has_header("Retry-After")) return std::nullopt;
    const auto value = res.get_header_value("Retry-After");
    char* end = nullptr;
    const long seconds = std::strtol(value.c_str(), &end, 10);
    if (end == value.c_str() || seconds < 0) return std::nullopt;
    return std::chrono::milliseconds(seconds * 1000);
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty() || config_.model.empty())
        throw GatewayError(GatewayErrorKind::InvalidConfig,
                           "http backend needs base_url and model");
}

CompletionResponse HttpBackend::complete(const CompletionRequest& request) {
    nlohmann::json body;
    body["model"] = config_.model;
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_output_tokens;
    auto& messages = body["messages"] = nlohmann::json::array();
    for (const auto& m : request.messages)
        messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});

    httplib::Client client(config_.base_url);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    httplib::Headers headers;
    if (!config_.api_key.empty())
        headers.emplace("Authorization", "Bearer " + config_.api_key);

    auto result = client.Post("/v1/chat/completions", headers, body.dump(), "application/json");
    if (!result)
        throw GatewayError(GatewayErrorKind::Transport,
                           "request failed: " + httplib::to_string(result.error()));
    if (result->status == 429)
        throw GatewayError(GatewayErrorKind::RateLimited, "rate limited (429)",
                           parse_retry_after(*result));
    if (result->status < 200 || result->status >= 300)
        throw GatewayError(GatewayErrorKind::Transport,
                           "http status " + std::to_string(result->status) + ": " + result->body);

    nlohmann::json payload;
    try {
        payload = nlohmann::json::parse(result->body);
    } catch (const nlohmann::json::exception& e) {
        throw GatewayError(GatewayErrorKind::MalformedResponse,
                           std::string("unparseable body: ") + e.what());
    }
    if (!payload.contains("choices") || payload["choices"].empty() ||
        !payload["choices"][0].contains("message") ||
        !payload["choices"][0]["message"].contains("content"))
        throw GatewayError(GatewayErrorKind::MalformedResponse, "response has no message content");

    CompletionResponse response;
    response.content = payload["choices"][0]["message"]["content"].get<std::string>();
    response.backend_id = id();
    if (payload.contains("usage")) {
        const auto& u = payload["usage"];
        response.usage.prompt_tokens = u.value("prompt_tokens", std::int64_t{0});
        response.usage.completion_tokens = u.value("completion_tokens", std::int64_t{0});
    } else {
        // Usage fallback when the endpoint reports none.
        std::string joined;
        for (const auto& m : request.messages) joined += m.content;
        response.usage.prompt_tokens = count_tokens_approx(joined);
        response.usage.completion_tokens = count_tokens_approx(response.content);
    }
    return response;
}

}  // namespace belle::llm
