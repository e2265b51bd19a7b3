#include <algorithm>
#include <cmath>
#include <sstream>
#include <nlohmann/json.hpp>

#include "socratic/errors.hpp"
#include "socratic/llm.hpp"
#include "socratic/serialization.hpp"
#include "socratic/text.hpp"

namespace socratic::llm {

using nlohmann::json;

std::string_view to_string(Role role) {
    switch (role) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

Role role_from_string(std::string_view text) {
    if (text == "system") return Role::System;
    if (text == "user") return Role::User;
    if (text == "assistant") return Role::Assistant;
    throw ValidationError("unknown chat role '" + std::string(text) + "'");
}

std::string_view ChatRequest::last_user_message() const {
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->role == Role::User) return it->content;
    }
    return {};
}

void validate(const ChatRequest& req) {
    if (req.messages.empty()) throw ValidationError("chat request has no messages");
    if (req.messages.front().role != Role::System) {
        throw ValidationError("first chat message must be the system prompt");
    }
    for (const auto& m : req.messages) {
        if (m.role != Role::Assistant && text::trim(m.content).empty()) {
            throw ValidationError("system/user message content must not be empty");
        }
    }
    if (req.temperature < 0.0) throw ValidationError("temperature must be >= 0");
    if (req.max_output_tokens <= 0) throw ValidationError("max_output_tokens must be positive");
}

// ---------------------------------------------------------------------------

ReplayLog::ReplayLog(const std::filesystem::path& path) : path_(path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    out_.open(path, std::ios::app | std::ios::binary);
    if (!out_) throw StoreError("cannot open replay log " + path.string());
}

void ReplayLog::record(const ChatRequest& req, const ChatResponse& resp) {
    json messages = json::array();
    for (const auto& m : req.messages) {
        messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    }
    const auto now = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::system_clock::now().time_since_epoch());
    const json line{{"request_tag", req.request_tag},
                    {"model", req.model},
                    {"messages", std::move(messages)},
                    {"content", resp.content},
                    {"usage",
                     {{"prompt_tokens", resp.usage.prompt_tokens},
                      {"completion_tokens", resp.usage.completion_tokens}}},
                    {"latency_ms", resp.latency_ms},
                    {"attempts", resp.attempts},
                    {"timestamp", now.count()}};
    std::lock_guard lock(mutex_);
    out_ << line.dump() << '\n';
    out_.flush();
}

// ---------------------------------------------------------------------------

void CostLedger::check() const {
    std::lock_guard lock(mutex_);
    if (budget_ && totals_.prompt_tokens + totals_.completion_tokens >= *budget_) {
        throw BudgetExceeded("token budget of " + std::to_string(*budget_) + " exhausted");
    }
}

void CostLedger::charge(const TokenUsage& usage) {
    std::lock_guard lock(mutex_);
    totals_.prompt_tokens += usage.prompt_tokens;
    totals_.completion_tokens += usage.completion_tokens;
    ++calls_;
}

TokenUsage CostLedger::totals() const {
    std::lock_guard lock(mutex_);
    return totals_;
}

std::int64_t CostLedger::calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

// ---------------------------------------------------------------------------

ChatResponse ChatBackend::complete(const ChatRequest& req) {
    validate(req);
    if (ledger_) ledger_->check();
    ChatResponse resp = do_complete(req);
    if (ledger_) ledger_->charge(resp.usage);
    if (replay_log_) replay_log_->record(req, resp);
    if (text::trim(resp.content).empty()) {
        throw ResponseEmpty("backend returned a blank reply for '" + req.request_tag + "'");
    }
    return resp;
}

namespace {

// Offline backends have no tokenizer; four bytes per token is the usual
// rough estimate and keeps budget enforcement testable.
TokenUsage estimate_usage(const ChatRequest& req, std::string_view reply) {
    std::int64_t prompt_bytes = 0;
    for (const auto& m : req.messages) prompt_bytes += static_cast<std::int64_t>(m.content.size());
    return {(prompt_bytes + 3) / 4, (static_cast<std::int64_t>(reply.size()) + 3) / 4};
}

}  // namespace

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_replay_log(const std::filesystem::path& path) {
    std::istringstream lines(read_file(path));
    auto backend = std::make_unique<ScriptedBackend>();
    std::size_t line_no = 0;
    for (std::string line; std::getline(lines, line);) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        json entry;
        try {
            entry = json::parse(line);
        } catch (const json::exception& e) {
            throw ValidationError("replay log line " + std::to_string(line_no) + ": " + e.what());
        }
        std::optional<std::string> matcher;
        for (auto it = entry.at("messages").rbegin(); it != entry.at("messages").rend(); ++it) {
            if ((*it).at("role") == "user") {
                matcher = (*it).at("content").get<std::string>();
                break;
            }
        }
        backend->push(entry.at("content").get<std::string>(), std::move(matcher));
    }
    return backend;
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_script_file(const std::filesystem::path& path) {
    const json doc = json::parse(read_file(path));
    const json& items = doc.is_object() ? doc.at("script") : doc;
    auto backend = std::make_unique<ScriptedBackend>();
    for (const auto& item : items) {
        if (item.is_string()) {
            backend->push(item.get<std::string>());
        } else {
            std::optional<std::string> matcher;
            if (item.contains("match")) matcher = item.at("match").get<std::string>();
            backend->push(item.at("reply").get<std::string>(), std::move(matcher));
        }
    }
    return backend;
}

void ScriptedBackend::push(std::string reply, std::optional<std::string> matcher) {
    std::lock_guard lock(mutex_);
    script_.push_back({std::move(matcher), std::move(reply)});
}

std::size_t ScriptedBackend::cursor() const {
    std::lock_guard lock(mutex_);
    return cursor_;
}

std::size_t ScriptedBackend::remaining() const {
    std::lock_guard lock(mutex_);
    return script_.size() - cursor_;
}

std::vector<ChatRequest> ScriptedBackend::requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
}

ChatResponse ScriptedBackend::do_complete(const ChatRequest& req) {
    std::lock_guard lock(mutex_);
    if (cursor_ >= script_.size()) {
        throw ScriptExhausted("script exhausted after " + std::to_string(script_.size()) +
                              " replies (request '" + req.request_tag + "')");
    }
    const Entry& entry = script_[cursor_];
    if (entry.matcher && req.last_user_message().find(*entry.matcher) == std::string_view::npos) {
        throw ScriptMismatch("script entry " + std::to_string(cursor_) + " expects the last user message to contain '" +
                             *entry.matcher + "' (request '" + req.request_tag + "')");
    }
    ++cursor_;
    requests_.push_back(req);
    return ChatResponse{entry.reply, estimate_usage(req, entry.reply), 0, 1};
}

std::int64_t CallbackBackend::call_count() const {
    std::lock_guard lock(mutex_);
    return static_cast<std::int64_t>(requests_.size());
}

std::vector<ChatRequest> CallbackBackend::requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
}

ChatResponse CallbackBackend::do_complete(const ChatRequest& req) {
    {
        std::lock_guard lock(mutex_);
        requests_.push_back(req);
    }
    std::string reply = handler_(req);
    auto usage = estimate_usage(req, reply);
    return ChatResponse{std::move(reply), usage, 0, 1};
}

// ---------------------------------------------------------------------------

BackoffSchedule::BackoffSchedule(RetryPolicy policy, std::uint64_t seed) : policy_(policy), rng_(seed) {}

std::chrono::milliseconds BackoffSchedule::next() {
    const double ceiling = static_cast<double>(policy_.initial_delay.count()) * std::pow(policy_.factor, retry_++);
    auto delay = std::chrono::milliseconds(static_cast<std::int64_t>(ceiling));
    if (policy_.jitter) {
        std::uniform_int_distribution<std::int64_t> draw(0, delay.count());
        delay = std::chrono::milliseconds(draw(rng_));
    }
    delay = std::max(delay, previous_);
    previous_ = delay;
    return delay;
}

}  // namespace socratic::llm
