#include "belle/mock_backend.hpp"

#include <fstream>

#include "belle/serialization.hpp"

namespace belle::llm {
namespace {

bool tag_matches(const std::string& pattern, const std::string& tag) {
    if (pattern.empty()) return true;
    if (pattern.back() == '*') return tag.rfind(pattern.substr(0, pattern.size() - 1), 0) == 0;
    return pattern == tag;
}

}  // namespace

MockBackend MockBackend::from_json(const nlohmann::json& script) {
    if (!script.is_array())
        throw GatewayError(GatewayErrorKind::InvalidConfig, "mock script must be a JSON list");
    std::vector<MockRule> rules;
    for (const auto& item : script) {
        MockRule rule;
        rule.tag = item.value("tag", std::string{});
        rule.content_contains = item.value("content_contains", std::string{});
        if (!item.contains("response"))
            throw GatewayError(GatewayErrorKind::InvalidConfig, "mock rule missing response");
        rule.response = item.at("response").get<std::string>();
        if (item.contains("usage")) rule.usage = token_usage_from_json(item.at("usage"));
        rules.push_back(std::move(rule));
    }
    return MockBackend(std::move(rules));
}

MockBackend MockBackend::from_script_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw GatewayError(GatewayErrorKind::InvalidConfig,
                           "cannot open mock script: " + path.string());
    nlohmann::json script;
    try {
        in >> script;
    } catch (const nlohmann::json::exception& e) {
        throw GatewayError(GatewayErrorKind::InvalidConfig,
                           "bad mock script " + path.string() + ": " + e.what());
    }
    return from_json(script);
}

CompletionResponse MockBackend::complete(const CompletionRequest& request) {
    std::string joined;
    for (const auto& m : request.messages) {
        joined += m.content;
        joined.push_back('\n');
    }
    for (const auto& rule : rules_) {
        if (!tag_matches(rule.tag, request.tag)) continue;
        if (!rule.content_contains.empty() &&
            joined.find(rule.content_contains) == std::string::npos)
            continue;
        CompletionResponse response;
        response.content = rule.response;
        response.usage = rule.usage.value_or(TokenUsage{count_tokens_approx(joined),
                                                        count_tokens_approx(rule.response)});
        response.backend_id = id();
        return response;
    }
    throw GatewayError(GatewayErrorKind::ScriptMiss,
                       "no mock rule matches request tag '" + request.tag + "'");
}

}  // namespace belle::llm
