#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "belle/types.hpp"

namespace belle::llm {

enum class MessageRole { System, User, Assistant };

std::string to_string(MessageRole role);

struct ChatMessage {
    MessageRole role = MessageRole::User;
    std::string content;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

/// One chat-completion call. `tag` labels the pipeline phase for the ledger
/// (e.g. "classifier", "debate.fast", "executor.substep").
struct CompletionRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_output_tokens = 1024;
    std::string tag;
};

struct CompletionResponse {
    std::string content;
    TokenUsage usage;
    std::string backend_id;
};

enum class GatewayErrorKind { Transport, RateLimited, MalformedResponse, ScriptMiss, InvalidConfig };

class GatewayError : public std::runtime_error {
public:
    GatewayError(GatewayErrorKind kind, const std::string& what,
                 std::optional<std::chrono::milliseconds> retry_after = std::nullopt)
        : std::runtime_error(what), kind_(kind), retry_after_(retry_after) {}

    GatewayErrorKind kind() const { return kind_; }
    std::optional<std::chrono::milliseconds> retry_after() const { return retry_after_; }

private:
    GatewayErrorKind kind_;
    std::optional<std::chrono::milliseconds> retry_after_;
};

/// Deterministic fallback token count for backends that report no usage:
/// a token is a maximal alphanumeric run or a single punctuation character.
std::int64_t count_tokens_approx(std::string_view text);

/// Append-only, thread-safe accumulator of (tag, usage) entries.
class TokenLedger {
public:
    struct Report {
        std::map<std::string, TokenUsage> per_tag;
        TokenUsage total;
    };

    void record(const std::string& tag, const TokenUsage& usage);
    std::vector<std::pair<std::string, TokenUsage>> entries() const;
    Report report() const;
    void clear();

private:
    mutable std::mutex mutex_;
    std::vector<std::pair<std::string, TokenUsage>> entries_;
};

inline TokenLedger::Report ledger_report(const TokenLedger& ledger) { return ledger.report(); }

/// Chat-completion provider. Implementations must be safe for concurrent
/// calls.
class Backend {
public:
    virtual ~Backend() = default;
    virtual CompletionResponse complete(const CompletionRequest& request) = 0;
    virtual std::string id() const = 0;
};

struct RetryPolicy {
    bool enabled = true;
    int max_attempts = 3;
    std::chrono::milliseconds base_delay{100};
};

/// Front door for all LLM calls: applies the retry policy, bounds in-flight
/// requests, and records every response's usage in the ledger.
class Gateway {
public:
    explicit Gateway(std::shared_ptr<Backend> backend, RetryPolicy retry = {},
                     int max_inflight = 0);

    CompletionResponse complete(const CompletionRequest& request);

    TokenLedger& ledger() { return ledger_; }
    const TokenLedger& ledger() const { return ledger_; }
    Backend& backend() { return *backend_; }

    /// Test hook: observes every request handed to the backend (including
    /// retries), before completion.
    void set_request_observer(std::function<void(const CompletionRequest&)> observer);

private:
    std::shared_ptr<Backend> backend_;
    RetryPolicy retry_;
    int max_inflight_;
    int inflight_ = 0;
    std::mutex inflight_mutex_;
    std::condition_variable_any inflight_cv_;
    TokenLedger ledger_;
    std::function<void(const CompletionRequest&)> observer_;
    std::mutex observer_mutex_;
};

}  // namespace belle::llm
