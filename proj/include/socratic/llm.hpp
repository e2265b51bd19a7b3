#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace socratic::llm {

enum class Role { System, User, Assistant };

std::string_view to_string(Role role);
Role role_from_string(std::string_view text);

struct ChatMessage {
    Role role = Role::User;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 0.7;
    int max_output_tokens = 1024;
    std::string request_tag;

    /// Content of the last user message, or empty when there is none.
    std::string_view last_user_message() const;
};

/// Throws ValidationError when the request breaks its invariants.
void validate(const ChatRequest& req);

struct TokenUsage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;

    bool operator==(const TokenUsage&) const = default;
};

struct ChatResponse {
    std::string content;  // verbatim, untrimmed
    TokenUsage usage;
    std::int64_t latency_ms = 0;
    int attempts = 1;
};

/// Append-only JSON Lines log of request/response pairs.
class ReplayLog {
public:
    explicit ReplayLog(const std::filesystem::path& path);

    void record(const ChatRequest& req, const ChatResponse& resp);
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::mutex mutex_;
    std::filesystem::path path_;
    std::ofstream out_;
};

/// Per-run token accounting with an optional ceiling on total tokens.
class CostLedger {
public:
    explicit CostLedger(std::optional<std::int64_t> token_budget = std::nullopt) : budget_(token_budget) {}

    /// Throws BudgetExceeded when the ceiling has already been reached.
    void check() const;
    void charge(const TokenUsage& usage);

    TokenUsage totals() const;
    std::int64_t calls() const;
    std::optional<std::int64_t> budget() const noexcept { return budget_; }

private:
    mutable std::mutex mutex_;
    TokenUsage totals_;
    std::int64_t calls_ = 0;
    std::optional<std::int64_t> budget_;
};

/// Chat-completion backend. Implementations must tolerate concurrent calls.
/// `complete` validates the request, enforces the cost ledger, rejects blank
/// replies and appends to the replay log; subclasses only talk to the model.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;

    ChatResponse complete(const ChatRequest& req);

    void set_replay_log(std::shared_ptr<ReplayLog> log) { replay_log_ = std::move(log); }
    void set_cost_ledger(std::shared_ptr<CostLedger> ledger) { ledger_ = std::move(ledger); }
    const std::shared_ptr<CostLedger>& cost_ledger() const noexcept { return ledger_; }

private:
    virtual ChatResponse do_complete(const ChatRequest& req) = 0;

    std::shared_ptr<ReplayLog> replay_log_;
    std::shared_ptr<CostLedger> ledger_;
};

/// Deterministic backend replaying an ordered script. Each entry may carry a
/// substring that the request's last user message must contain.
class ScriptedBackend final : public ChatBackend {
public:
    struct Entry {
        std::optional<std::string> matcher;
        std::string reply;
    };

    ScriptedBackend() = default;
    explicit ScriptedBackend(std::vector<Entry> script) : script_(std::move(script)) {}

    /// Builds a script from a replay log; each entry matches on the full
    /// recorded last user message.
    static std::unique_ptr<ScriptedBackend> from_replay_log(const std::filesystem::path& path);
    /// Loads `[{"reply": ..., "match": ...}, ...]` or `["reply", ...]`.
    static std::unique_ptr<ScriptedBackend> from_script_file(const std::filesystem::path& path);

    void push(std::string reply, std::optional<std::string> matcher = std::nullopt);

    std::size_t cursor() const;
    std::size_t remaining() const;
    /// Every request seen so far, in consumption order.
    std::vector<ChatRequest> requests() const;

private:
    ChatResponse do_complete(const ChatRequest& req) override;

    mutable std::mutex mutex_;
    std::vector<Entry> script_;
    std::size_t cursor_ = 0;
    std::vector<ChatRequest> requests_;
};

/// Backend whose reply is computed by a function of the request. Used for
/// rule-driven fakes (e.g. a judge biased by question content) where the
/// call order is not fixed.
class CallbackBackend final : public ChatBackend {
public:
    using Handler = std::function<std::string(const ChatRequest&)>;

    explicit CallbackBackend(Handler handler) : handler_(std::move(handler)) {}

    std::int64_t call_count() const;
    std::vector<ChatRequest> requests() const;

private:
    ChatResponse do_complete(const ChatRequest& req) override;

    Handler handler_;
    mutable std::mutex mutex_;
    std::vector<ChatRequest> requests_;
};

/// Exponential backoff with jitter. The ceiling for retry k is
/// initial_delay * factor^k; the drawn delay is uniform in [0, ceiling] and
/// then clamped to be no shorter than the previous delay.
struct RetryPolicy {
    int max_attempts = 5;
    std::chrono::milliseconds initial_delay{500};
    double factor = 2.0;
    bool jitter = true;
};

class BackoffSchedule {
public:
    BackoffSchedule(RetryPolicy policy, std::uint64_t seed);

    /// Delay to wait before retry number `retry` (0-based).
    std::chrono::milliseconds next();

private:
    RetryPolicy policy_;
    std::mt19937_64 rng_;
    int retry_ = 0;
    std::chrono::milliseconds previous_{0};
};

struct RemoteConfig {
    std::string base_url;  // e.g. https://api.openai.com/v1
    std::string api_key;
    RetryPolicy retry;
    std::chrono::seconds timeout{120};
    std::uint64_t jitter_seed = 0x5eed;
    /// Injected for tests; defaults to std::this_thread::sleep_for.
    std::function<void(std::chrono::milliseconds)> sleep;

    /// Reads SOCRATIC_API_BASE and SOCRATIC_API_KEY; throws InvalidCredential
    /// when the key is missing.
    static RemoteConfig from_env();
};

/// OpenAI-compatible `POST {base_url}/chat/completions` client.
class RemoteBackend final : public ChatBackend {
public:
    explicit RemoteBackend(RemoteConfig config);

    /// Delays slept between attempts of the most recent call (for tests).
    std::vector<std::chrono::milliseconds> last_delays() const;

private:
    ChatResponse do_complete(const ChatRequest& req) override;

    RemoteConfig config_;
    std::string scheme_host_port_;
    std::string path_prefix_;
    mutable std::mutex mutex_;
    std::vector<std::chrono::milliseconds> last_delays_;
    std::uint64_t call_counter_ = 0;
};

/// Request body in the wire format.
std::string encode_request_body(const ChatRequest& req);
/// Extracts `choices[0].message.content` and usage; throws BackendError on
/// a malformed body.
ChatResponse decode_response_body(std::string_view body);

}  // namespace socratic::llm
