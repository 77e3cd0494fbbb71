#include "context_drift/http_model.hpp"

#include <httplib.h>

#include <cstdlib>
#include <thread>

#include "context_drift/errors.hpp"
#include "context_drift/text.hpp"
#include "context_drift/vendor_json.hpp"

namespace context_drift {

namespace {

bool mentions_context_overflow(const std::string& body) {
    const std::string lower = text::to_lower(body);
    return lower.find("context_length_exceeded") != std::string::npos ||
           lower.find("maximum context length") != std::string::npos ||
           lower.find("context length") != std::string::npos;
}

}  // namespace

std::optional<std::string> api_key_from_env() {
    const char* value = std::getenv(kApiKeyEnv);
    if (value == nullptr || *value == '\0') {
        return std::nullopt;
    }
    return std::string(value);
}

HttpChatModel::HttpChatModel(HttpModelConfig config) : config_(std::move(config)) {
    const std::string& url = config_.base_url;
    const std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("endpoint URL needs a scheme (http:// or https://): '" + url + "'");
    }
    const std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw ConfigError("unsupported endpoint scheme '" + scheme + "'");
    }
    const std::size_t path_start = url.find('/', scheme_end + 3);
    scheme_host_port_ = url.substr(0, path_start);
    path_prefix_ = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') {
        path_prefix_.pop_back();
    }
    if (scheme_host_port_.size() <= scheme_end + 3) {
        throw ConfigError("endpoint URL has no host: '" + url + "'");
    }
}

std::string build_chat_body(const ChatRequest& request) {
    json messages = json::array();
    for (const Turn& t : request.messages) {
        messages.push_back(json{{"role", std::string(to_string(t.role))}, {"content", t.text}});
    }
    return json{{"model", request.params.model_name},
                {"messages", std::move(messages)},
                {"temperature", request.params.temperature},
                {"max_tokens", request.params.max_new_tokens}}
        .dump();
}

ModelAnswer parse_chat_response(const std::string& body) {
    try {
        const json j = json::parse(body);
        ModelAnswer answer;
        answer.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
        if (j.contains("usage") && j.at("usage").is_object()) {
            const json& usage = j.at("usage");
            if (usage.contains("prompt_tokens") && usage.at("prompt_tokens").is_number_integer()) {
                answer.reported_prompt_tokens = usage.at("prompt_tokens").get<std::int64_t>();
            }
            if (usage.contains("completion_tokens") && usage.at("completion_tokens").is_number_integer()) {
                answer.reported_completion_tokens = usage.at("completion_tokens").get<std::int64_t>();
            }
        }
        return answer;
    } catch (const json::exception& e) {
        throw TransportError(std::string("malformed chat completion response: ") + e.what());
    }
}

ModelAnswer HttpChatModel::complete(const ChatRequest& request) {
    validate_request(request);
    const std::string body = build_chat_body(request);
    const std::string path = path_prefix_ + "/chat/completions";

    httplib::Client client(scheme_host_port_);
    const auto timeout = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    httplib::Headers headers;
    if (config_.api_key) {
        headers.emplace("Authorization", "Bearer " + *config_.api_key);
    }

    std::int64_t total_ms = 0;
    int last_status = 0;
    std::string last_body;
    for (int attempt = 0;; ++attempt) {
        const auto start = std::chrono::steady_clock::now();
        auto res = client.Post(path, headers, body, "application/json");
        total_ms +=
            std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
        if (!res) {
            throw TransportError("request to " + scheme_host_port_ + path + " failed: " + httplib::to_string(res.error()));
        }
        const int status = res->status;
        if (status >= 200 && status < 300) {
            ModelAnswer answer = parse_chat_response(res->body);
            answer.latency_ms = total_ms;
            return answer;
        }
        if (status == 401 || status == 403) {
            throw AuthRequired(status, res->body + " (set " + kApiKeyEnv + ")");
        }
        const bool retryable = status == 429 || status >= 500;
        if (!retryable) {
            if (mentions_context_overflow(res->body)) {
                throw BudgetRejected(status, res->body);
            }
            throw RemoteRejected(status, res->body);
        }
        last_status = status;
        last_body = res->body;
        if (attempt >= config_.retry.max_retries) {
            break;
        }
        std::this_thread::sleep_for(config_.retry.initial_backoff * (1 << attempt));
    }
    if (last_status == 429) {
        throw RemoteRejected(last_status, last_body);
    }
    throw TransportError("endpoint kept failing with HTTP " + std::to_string(last_status) + " after " +
                         std::to_string(config_.retry.max_retries) + " retries: " + last_body);
}

}  // namespace context_drift
