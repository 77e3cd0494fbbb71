#pragma once

#include <chrono>
#include <optional>
#include <string>

#include "context_drift/model_client.hpp"

namespace context_drift {

inline constexpr const char* kApiKeyEnv = "CONTEXT_DRIFT_API_KEY";

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{1000};  // doubles per retry: 1s, 2s, 4s
};

struct HttpModelConfig {
    std::string base_url;  // e.g. "http://localhost:8000/v1"
    std::optional<std::string> api_key;
    std::chrono::seconds timeout{60};
    RetryPolicy retry;
};

/// Reads CONTEXT_DRIFT_API_KEY; nullopt when unset or empty.
std::optional<std::string> api_key_from_env();

/// OpenAI-compatible chat-completions client:
/// POST {base_url}/chat/completions with
/// {model, messages:[{role, content}], temperature, max_tokens}.
///
/// 429 and 5xx are retried with exponential backoff; latency_ms is the sum
/// of the attempts' request-to-last-byte times. 401/403 raise AuthRequired,
/// context-length complaints BudgetRejected, other 4xx RemoteRejected, and
/// network failures or exhausted 5xx retries TransportError.
class HttpChatModel final : public ModelClient {
public:
    explicit HttpChatModel(HttpModelConfig config);

    ModelAnswer complete(const ChatRequest& request) override;

    const HttpModelConfig& config() const noexcept { return config_; }

private:
    HttpModelConfig config_;
    std::string scheme_host_port_;
    std::string path_prefix_;
};

std::string build_chat_body(const ChatRequest& request);

/// Extracts choices[0].message.content and usage; throws TransportError on a
/// body that is not a chat completion.
ModelAnswer parse_chat_response(const std::string& body);

}  // namespace context_drift
