#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "belle/gateway.hpp"

namespace belle::llm {

/// One scripted rule. A rule matches a request when its tag pattern matches
/// the request tag (exact, or prefix when the pattern ends in '*'; empty
/// matches anything) and, if set, `content_contains` occurs somewhere in the
/// concatenated message contents. First matching rule wins.
struct MockRule {
    std::string tag;
    std::string content_contains;
    std::string response;
    std::optional<TokenUsage> usage;  // absent: derived from count_tokens_approx
};

/// Deterministic scripted backend: a pure function of (script, request).
class MockBackend : public Backend {
public:
    explicit MockBackend(std::vector<MockRule> rules) : rules_(std::move(rules)) {}

    static MockBackend from_json(const nlohmann::json& script);
    static MockBackend from_script_file(const std::filesystem::path& path);

    CompletionResponse complete(const CompletionRequest& request) override;
    std::string id() const override { return "mock"; }

private:
    std::vector<MockRule> rules_;
};

}  // namespace belle::llm
