#include "belle/gateway.hpp"

#include <cctype>
#include <thread>

namespace belle::llm {

std::string to_string(MessageRole role) {
    switch (role) {
        case MessageRole::System: return "system";
        case MessageRole::User: return "user";
        case MessageRole::Assistant: return "assistant";
    }
    return "user";
}

std::int64_t count_tokens_approx(std::string_view text) {
    std::int64_t count = 0;
    bool in_word = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            in_word = false;
        } else if (std::ispunct(c)) {
            in_word = false;
            ++count;  // each punctuation character is its own token
        } else {
            if (!in_word) ++count;
            in_word = true;
        }
    }
    return count;
}

void TokenLedger::record(const std::string& tag, const TokenUsage& usage) {
    std::lock_guard lock(mutex_);
    entries_.emplace_back(tag, usage);
}

std::vector<std::pair<std::string, TokenUsage>> TokenLedger::entries() const {
    std::lock_guard lock(mutex_);
    return entries_;
}

TokenLedger::Report TokenLedger::report() const {
    std::lock_guard lock(mutex_);
    Report report;
    for (const auto& [tag, usage] : entries_) {
        report.per_tag[tag] += usage;
        report.total += usage;
    }
    return report;
}

void TokenLedger::clear() {
    std::lock_guard lock(mutex_);
    entries_.clear();
}

Gateway::Gateway(std::shared_ptr<Backend> backend, RetryPolicy retry, int max_inflight)
    : backend_(std::move(backend)), retry_(retry), max_inflight_(max_inflight) {
    if (!backend_) throw GatewayError(GatewayErrorKind::InvalidConfig, "gateway needs a backend");
}

void Gateway::set_request_observer(std::function<void(const CompletionRequest&)> observer) {
    std::lock_guard lock(observer_mutex_);
    observer_ = std::move(observer);
}

CompletionResponse Gateway::complete(const CompletionRequest& request) {
    if (request.messages.empty())
        throw GatewayError(GatewayErrorKind::InvalidConfig, "request has no messages");

    struct InflightGuard {
        Gateway& g;
        explicit InflightGuard(Gateway& gw) : g(gw) {
            if (g.max_inflight_ <= 0) return;
            std::unique_lock lock(g.inflight_mutex_);
            g.inflight_cv_.wait(lock, [&] { return g.inflight_ < g.max_inflight_; });
            ++g.inflight_;
        }
        ~InflightGuard() {
            if (g.max_inflight_ <= 0) return;
            {
                std::lock_guard lock(g.inflight_mutex_);
                --g.inflight_;
            }
            g.inflight_cv_.notify_one();
        }
    } guard(*this);

    const int attempts = retry_.enabled ? retry_.max_attempts : 1;
    for (int attempt = 1;; ++attempt) {
        {
            std::lock_guard lock(observer_mutex_);
            if (observer_) observer_(request);
        }
        try {
            CompletionResponse response = backend_->complete(request);
            ledger_.record(request.tag, response.usage);
            return response;
        } catch (const GatewayError& e) {
            const bool retryable = e.kind() == GatewayErrorKind::Transport ||
                                   e.kind() == GatewayErrorKind::RateLimited;
            if (!retryable || attempt >= attempts) throw;
            auto delay = retry_.base_delay * (1 << (attempt - 1));
            if (e.retry_after()) delay = *e.retry_after();
            std::this_thread::sleep_for(delay);
        }
    }
}

}  // namespace belle::llm
