#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <thread>

#include "context_drift/errors.hpp"
#include "context_drift/http_model.hpp"
#include "context_drift/vendor_json.hpp"

using namespace context_drift;

namespace {

std::string completion(const std::string& content) {
    return json{{"choices", json::array({json{{"message", json{{"role", "assistant"}, {"content", content}}}}})},
                {"usage", json{{"prompt_tokens", 42}, {"completion_tokens", 3}}}}
        .dump();
}

class LocalEndpoint : public ::testing::Test {
protected:
    void SetUp() override {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            last_body_ = req.body;
            last_auth_ = req.get_header_value("Authorization");
            const json j = json::parse(req.body);
            res.set_content(completion(j.at("messages").back().at("content").get<std::string>()), "application/json");
        });
        server_.Post("/flaky/chat/completions", [this](const httplib::Request&, httplib::Response& res) {
            if (++hits_ <= 2) {
                res.status = 500;
                res.set_content("overloaded", "text/plain");
                return;
            }
            res.set_content(completion("park"), "application/json");
        });
        server_.Post("/down/chat/completions", [this](const httplib::Request&, httplib::Response& res) {
            ++hits_;
            res.status = 503;
        });
        server_.Post("/busy/chat/completions", [this](const httplib::Request&, httplib::Response& res) {
            ++hits_;
            res.status = 429;
        });
        server_.Post("/auth/chat/completions", [](const httplib::Request& req, httplib::Response& res) {
            if (req.get_header_value("Authorization") != "Bearer secret") {
                res.status = 401;
                res.set_content("missing key", "text/plain");
                return;
            }
            res.set_content(completion("ok"), "application/json");
        });
        server_.Post("/long/chat/completions", [](const httplib::Request&, httplib::Response& res) {
            res.status = 400;
            res.set_content(R"({"error":{"message":"This model's maximum context length is 2048 tokens"}})",
                            "application/json");
        });
        server_.Post("/bad/chat/completions", [this](const httplib::Request&, httplib::Response& res) {
            ++hits_;
            res.status = 422;
            res.set_content("unprocessable", "text/plain");
        });
        server_.Post("/garbage/chat/completions", [](const httplib::Request&, httplib::Response& res) {
            res.set_content("not json", "text/plain");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    void TearDown() override {
        server_.stop();
        thread_.join();
    }

    HttpChatModel model(const std::string& path, std::optional<std::string> key = std::nullopt) {
        HttpModelConfig c;
        c.base_url = "http://127.0.0.1:" + std::to_string(port_) + path;
        c.api_key = std::move(key);
        c.timeout = std::chrono::seconds(5);
        c.retry.initial_backoff = std::chrono::milliseconds(1);
        return HttpChatModel(c);
    }

    static std::vector<Turn> messages(const std::string& last) {
        return {Turn{Role::system, "system text", Tag{TagKind::preamble, 0, 0}},
                Turn{Role::user, last, Tag{TagKind::question, 0, 0}}};
    }

    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<int> hits_{0};
    std::string last_body_;
    std::string last_auth_;
};

}  // namespace

TEST_F(LocalEndpoint, MessagesPassThroughByteIdentical) {
    const std::string tricky = "Story:\nZoë \"moved\" to the café.\tTab \\ slash\r\n→ end ";
    auto m = model("/v1/", std::string("k1"));
    const auto msgs = messages(tricky);
    RequestParams p;
    p.model_name = "test-model";
    p.temperature = 0.7;
    p.max_new_tokens = 16;
    const auto answer = m.complete(ChatRequest{msgs, p});
    EXPECT_EQ(answer.text, tricky);
    EXPECT_EQ(answer.reported_prompt_tokens, 42);
    EXPECT_EQ(answer.reported_completion_tokens, 3);
    EXPECT_GE(answer.latency_ms, 0);
    EXPECT_EQ(last_auth_, "Bearer k1");
    const json sent = json::parse(last_body_);
    EXPECT_EQ(sent.at("model"), "test-model");
    EXPECT_DOUBLE_EQ(sent.at("temperature").get<double>(), 0.7);
    EXPECT_EQ(sent.at("max_tokens"), 16);
    ASSERT_EQ(sent.at("messages").size(), 2u);
    EXPECT_EQ(sent.at("messages")[0].at("role"), "system");
    EXPECT_EQ(sent.at("messages")[0].at("content"), "system text");
    EXPECT_EQ(sent.at("messages")[1].at("role"), "user");
    EXPECT_EQ(sent.at("messages")[1].at("content").get<std::string>(), tricky);
}

TEST_F(LocalEndpoint, ServerErrorsAreRetried) {
    auto m = model("/flaky");
    EXPECT_EQ(m.complete(ChatRequest{messages("q"), RequestParams{}}).text, "park");
    EXPECT_EQ(hits_.load(), 3);
}

TEST_F(LocalEndpoint, ExhaustedServerErrorsBecomeTransportError) {
    auto m = model("/down");
    EXPECT_THROW(m.complete(ChatRequest{messages("q"), RequestParams{}}), TransportError);
    EXPECT_EQ(hits_.load(), 4);
}

TEST_F(LocalEndpoint, ExhaustedRateLimitIsRemoteRejected) {
    auto m = model("/busy");
    try {
        m.complete(ChatRequest{messages("q"), RequestParams{}});
        FAIL();
    } catch (const RemoteRejected& e) {
        EXPECT_EQ(e.status(), 429);
    }
    EXPECT_EQ(hits_.load(), 4);
}

TEST_F(LocalEndpoint, MissingKeyIsAuthRequired) {
    EXPECT_THROW(model("/auth").complete(ChatRequest{messages("q"), RequestParams{}}), AuthRequired);
    EXPECT_EQ(model("/auth", std::string("secret")).complete(ChatRequest{messages("q"), RequestParams{}}).text, "ok");
}

TEST_F(LocalEndpoint, ContextLengthIsBudgetRejected) {
    EXPECT_THROW(model("/long").complete(ChatRequest{messages("q"), RequestParams{}}), BudgetRejected);
}

TEST_F(LocalEndpoint, OtherClientErrorsAreNotRetried) {
    EXPECT_THROW(model("/bad").complete(ChatRequest{messages("q"), RequestParams{}}), RemoteRejected);
    EXPECT_EQ(hits_.load(), 1);
}

TEST_F(LocalEndpoint, MalformedResponseIsTransportError) {
    EXPECT_THROW(model("/garbage").complete(ChatRequest{messages("q"), RequestParams{}}), TransportError);
}

TEST(HttpModel, ConnectionRefusedIsTransportError) {
    HttpModelConfig c;
    c.base_url = "http://127.0.0.1:1/v1";  // nothing listens on port 1
    c.timeout = std::chrono::seconds(2);
    EXPECT_THROW(HttpChatModel(c).complete(ChatRequest{std::vector<Turn>{Turn{Role::system, "s", {}}, Turn{Role::user, "q", {}}}, RequestParams{}}),
                 TransportError);
}

TEST(HttpModel, RejectsBadUrls) {
    HttpModelConfig c;
    c.base_url = "localhost:8000";
    EXPECT_THROW(HttpChatModel{c}, ConfigError);
    c.base_url = "ftp://host/v1";
    EXPECT_THROW(HttpChatModel{c}, ConfigError);
}

TEST(HttpModel, ParseResponseWithoutUsage) {
    const auto a = parse_chat_response(R"({"choices":[{"message":{"content":"Bedroom"}}]})");
    EXPECT_EQ(a.text, "Bedroom");
    EXPECT_FALSE(a.reported_prompt_tokens);
}

TEST(HttpModel, ApiKeyFromEnvironment) {
    ::setenv(kApiKeyEnv, "abc", 1);
    EXPECT_EQ(api_key_from_env(), "abc");
    ::setenv(kApiKeyEnv, "", 1);
    EXPECT_FALSE(api_key_from_env());
    ::unsetenv(kApiKeyEnv);
    EXPECT_FALSE(api_key_from_env());
}
