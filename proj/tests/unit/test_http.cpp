#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "belle/gateway.hpp"
#include "belle/http_backend.hpp"

using namespace belle;
using namespace belle::llm;

namespace {

// Local OpenAI-compatible stub. `rate_limit_first` requests get a 429 with
// Retry-After before the endpoint starts answering.
class StubServer {
public:
    explicit StubServer(int rate_limit_first = 0, bool malformed = false)
        : rate_limited_(rate_limit_first), malformed_(malformed) {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                    httplib::Response& res) {
            ++requests;
            last_body = req.body;
            if (auth_header.empty() && req.has_header("Authorization"))
                auth_header = req.get_header_value("Authorization");
            if (rate_limited_ > 0) {
                --rate_limited_;
                res.status = 429;
                res.set_header("Retry-After", "1");
                res.set_content("slow down", "text/plain");
                return;
            }
            if (malformed_) {
                res.set_content("{\"choices\": []}", "application/json");
                return;
            }
            nlohmann::json reply;
            reply["choices"] = {{{"message", {{"role", "assistant"}, {"content", "stub says hi"}}}}};
            reply["usage"] = {{"prompt_tokens", 12}, {"completion_tokens", 4}};
            res.set_content(reply.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~StubServer() {
        server_.stop();
        thread_.join();
    }

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

    std::atomic<int> requests{0};
    std::string last_body;
    std::string auth_header;

private:
    httplib::Server server_;
    int port_ = 0;
    std::atomic<int> rate_limited_;
    bool malformed_;
    std::thread thread_;
};

CompletionRequest simple_request() {
    CompletionRequest r;
    r.messages = {{MessageRole::System, "sys"}, {MessageRole::User, "hi"}};
    r.temperature = 0.3;
    r.max_output_tokens = 64;
    r.tag = "t";
    return r;
}

HttpBackendConfig config_for(const StubServer& server) {
    HttpBackendConfig cfg;
    cfg.base_url = server.base_url();
    cfg.model = "stub-model";
    cfg.api_key = "test-key";
    return cfg;
}

}  // namespace

TEST_SUITE("http") {

TEST_CASE("http backend speaks the chat-completions wire format") {
    StubServer server;
    HttpBackend backend(config_for(server));
    const auto response = backend.complete(simple_request());
    CHECK(response.content == "stub says hi");
    CHECK(response.usage == TokenUsage{12, 4});
    CHECK(server.auth_header == "Bearer test-key");

    const auto body = nlohmann::json::parse(server.last_body);
    CHECK(body["model"] == "stub-model");
    CHECK(body["messages"].size() == 2);
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["temperature"].get<double>() == doctest::Approx(0.3));
}

TEST_CASE("429 with retry-after is retried once then succeeds") {
    StubServer server(/*rate_limit_first=*/1);
    auto backend = std::make_shared<HttpBackend>(config_for(server));
    Gateway gateway(backend, RetryPolicy{true, 3, std::chrono::milliseconds(5)});
    const auto response = gateway.complete(simple_request());
    CHECK(response.content == "stub says hi");
    CHECK(server.requests == 2);
}

TEST_CASE("persistent 429 exhausts retries as RateLimited") {
    StubServer server(/*rate_limit_first=*/99);
    auto backend = std::make_shared<HttpBackend>(config_for(server));
    // Tiny base delay; the stub's Retry-After of 1s dominates the two sleeps.
    Gateway gateway(backend, RetryPolicy{true, 3, std::chrono::milliseconds(1)});
    try {
        gateway.complete(simple_request());
        FAIL("expected RateLimited");
    } catch (const GatewayError& e) {
        CHECK(e.kind() == GatewayErrorKind::RateLimited);
    }
    CHECK(server.requests == 3);
}

TEST_CASE("with retries disabled exactly one http request is issued") {
    StubServer server(/*rate_limit_first=*/99);
    auto backend = std::make_shared<HttpBackend>(config_for(server));
    Gateway gateway(backend, RetryPolicy{false, 3, std::chrono::milliseconds(1)});
    CHECK_THROWS_AS(gateway.complete(simple_request()), GatewayError);
    CHECK(server.requests == 1);
}

TEST_CASE("missing message content is MalformedResponse") {
    StubServer server(0, /*malformed=*/true);
    HttpBackend backend(config_for(server));
    try {
        backend.complete(simple_request());
        FAIL("expected MalformedResponse");
    } catch (const GatewayError& e) {
        CHECK(e.kind() == GatewayErrorKind::MalformedResponse);
    }
}

TEST_CASE("unreachable endpoint is Transport") {
    HttpBackendConfig cfg;
    cfg.base_url = "http://127.0.0.1:1";  // nothing listens here
    cfg.model = "m";
    cfg.timeout = std::chrono::seconds(2);
    HttpBackend backend(cfg);
    try {
        backend.complete(simple_request());
        FAIL("expected Transport");
    } catch (const GatewayError& e) {
        CHECK(e.kind() == GatewayErrorKind::Transport);
    }
}

}  // TEST_SUITE
