#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "socratic/errors.hpp"
#include "socratic/llm.hpp"

namespace socratic::llm {

using nlohmann::json;

RemoteConfig RemoteConfig::from_env() {
    RemoteConfig config;
    const char* base = std::getenv("SOCRATIC_API_BASE");
    config.base_url = base != nullptr && *base != '\0' ? base : "https://api.openai.com/v1";
    const char* key = std::getenv("SOCRATIC_API_KEY");
    if (key == nullptr || *key == '\0') {
        throw InvalidCredential("SOCRATIC_API_KEY is not set");
    }
    config.api_key = key;
    return config;
}

std::string encode_request_body(const ChatRequest& req) {
    json messages = json::array();
    for (const auto& m : req.messages) {
        messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    }
    return json{{"model", req.model},
                {"messages", std::move(messages)},
                {"temperature", req.temperature},
                {"max_tokens", req.max_output_tokens}}
        .dump();
}

ChatResponse decode_response_body(std::string_view body) {
    try {
        const json doc = json::parse(body);
        ChatResponse resp;
        const auto& content = doc.at("choices").at(0).at("message").at("content");
        resp.content = content.is_null() ? std::string{} : content.get<std::string>();
        if (doc.contains("usage") && doc.at("usage").is_object()) {
            resp.usage.prompt_tokens = doc.at("usage").value("prompt_tokens", std::int64_t{0});
            resp.usage.completion_tokens = doc.at("usage").value("completion_tokens", std::int64_t{0});
        }
        return resp;
    } catch (const json::exception& e) {
        throw BackendError(std::string("malformed chat completion response: ") + e.what());
    }
}

RemoteBackend::RemoteBackend(RemoteConfig config) : config_(std::move(config)) {
    if (config_.api_key.empty()) throw InvalidCredential("remote backend requires an API key");
    if (config_.retry.max_attempts < 1) throw ValidationError("retry policy needs at least one attempt");

    std::string url = config_.base_url;
    while (!url.empty() && url.back() == '/') url.pop_back();
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ValidationError("base URL needs a scheme: " + config_.base_url);
    const auto path_start = url.find('/', scheme_end + 3);
    scheme_host_port_ = url.substr(0, path_start);
    path_prefix_ = path_start == std::string::npos ? std::string{} : url.substr(path_start);

    if (!config_.sleep) {
        config_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    }
}

std::vector<std::chrono::milliseconds> RemoteBackend::last_delays() const {
    std::lock_guard lock(mutex_);
    return last_delays_;
}

ChatResponse RemoteBackend::do_complete(const ChatRequest& req) {
    std::uint64_t call_id = 0;
    {
        std::lock_guard lock(mutex_);
        call_id = call_counter_++;
    }
    BackoffSchedule backoff(config_.retry, config_.jitter_seed ^ (call_id * 0x9E3779B97F4A7C15ull));
    std::vector<std::chrono::milliseconds> delays;

    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    client.set_bearer_token_auth(config_.api_key);

    const std::string body = encode_request_body(req);
    const std::string path = path_prefix_ + "/chat/completions";
    std::string last_failure;

    for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
        const auto started = std::chrono::steady_clock::now();
        auto result = client.Post(path, body, "application/json");
        const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - started);

        if (result) {
            const int status = result->status;
            if (status == 200) {
                ChatResponse resp = decode_response_body(result->body);
                resp.latency_ms = latency.count();
                resp.attempts = attempt;
                std::lock_guard lock(mutex_);
                last_delays_ = delays;
                return resp;
            }
            if (status == 401 || status == 403) {
                throw InvalidCredential("endpoint rejected the credential (HTTP " + std::to_string(status) + ")");
            }
            if (status != 429 && status < 500) {
                throw BackendError("endpoint returned HTTP " + std::to_string(status) + ": " + result->body);
            }
            last_failure = "HTTP " + std::to_string(status);
        } else {
            last_failure = httplib::to_string(result.error());
        }

        if (attempt < config_.retry.max_attempts) {
            const auto delay = backoff.next();
            delays.push_back(delay);
            config_.sleep(delay);
        }
    }
    {
        std::lock_guard lock(mutex_);
        last_delays_ = delays;
    }
    throw BackendUnavailable("giving up after " + std::to_string(config_.retry.max_attempts) +
                             " attempts for '" + req.request_tag + "': " + last_failure);
}

}  // namespace socratic::llm
