#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "socratic/dialogue.hpp"
#include "socratic/domain.hpp"
#include "socratic/llm.hpp"

namespace socratic::service {

// ---------------------------------------------------------------------------
// Executors
// ---------------------------------------------------------------------------

class Executor {
public:
    virtual ~Executor() = default;
    virtual void submit(std::function<void()> task) = 0;
    /// Finishes or discards outstanding work; called before the owner dies.
    virtual void shutdown() {}
};

/// Holds tasks until the test drives them.
class QueuedExecutor final : public Executor {
public:
    void submit(std::function<void()> task) override;
    /// Runs the oldest queued task; false when none is queued.
    bool run_one();
    std::size_t run_all();
    std::size_t pending() const;

private:
    mutable std::mutex mutex_;
    std::deque<std::function<void()>> queue_;
};

/// Fixed pool of worker threads.
class ThreadPoolExecutor final : public Executor {
public:
    explicit ThreadPoolExecutor(std::size_t workers = 2);
    ~ThreadPoolExecutor() override;

    void submit(std::function<void()> task) override;
    void shutdown() override;
    /// Blocks until the queue is empty and no task is running.
    void wait_idle();

private:
    void loop();

    std::mutex mutex_;
    std::condition_variable cv_;
    std::condition_variable idle_cv_;
    std::deque<std::function<void()>> queue_;
    std::vector<std::thread> threads_;
    std::size_t active_ = 0;
    bool stopping_ = false;
};

// ---------------------------------------------------------------------------
// Sessions
// ---------------------------------------------------------------------------

enum class CycleStatus { Running, Completed, Failed };
enum class Decision { Pending, Accepted, Edited, Reconstrained };

std::string_view to_string(CycleStatus s);
std::string_view to_string(Decision d);

struct Cycle {
    int index = 1;
    GenerationContext context;  // what the agents saw, constraints included
    CycleStatus status = CycleStatus::Running;
    std::optional<DialogueTrace> trace;  // complete, or partial on backend failure
    std::optional<std::string> error_code;
    std::optional<std::string> error_message;
    Decision decision = Decision::Pending;
    std::optional<std::string> decision_text;
    std::string started_at;
    std::string finished_at;
};

struct TeacherSession {
    std::string id;
    GenerationContext context;
    IterationRegime regime = IterationRegime::dynamic();
    std::vector<Cycle> cycles;
    std::optional<std::string> final_question;
    std::string created_at;
    std::string updated_at;

    bool closed() const;
    /// "running", "awaiting_decision", "accepted" or "edited".
    std::string status() const;
};

nlohmann::json to_json(const TeacherSession& session);
nlohmann::json session_summary(const TeacherSession& session);

struct TeacherDecision {
    enum class Kind { Accept, Edit, Reconstrain } kind = Kind::Accept;
    std::string text;

    static TeacherDecision from_json(const nlohmann::json& j);
};

/// JSON Lines event log. With no path the log lives only in memory.
class SessionStore {
public:
    explicit SessionStore(std::optional<std::filesystem::path> path = std::nullopt);

    void append(const nlohmann::json& event);
    std::vector<nlohmann::json> events() const;
    const std::optional<std::filesystem::path>& path() const noexcept { return path_; }

private:
    std::optional<std::filesystem::path> path_;
    mutable std::mutex mutex_;
    std::vector<nlohmann::json> events_;
    std::ofstream out_;
};

struct ManagerOptions {
    dialogue::EngineOptions engine;
    std::size_t materials_byte_budget = kDefaultMaterialsByteBudget;
    std::uint64_t seed = 0;
};

/// Owns the sessions, runs cycles on the executor and persists every state
/// change as an event. Sessions are rebuilt from the store at construction;
/// cycles that were still running are marked failed.
class SessionManager {
public:
    SessionManager(llm::ChatBackend& backend, std::unique_ptr<Executor> executor,
                   std::shared_ptr<SessionStore> store = std::make_shared<SessionStore>(), ManagerOptions options = {});
    ~SessionManager();

    SessionManager(const SessionManager&) = delete;
    SessionManager& operator=(const SessionManager&) = delete;

    TeacherSession create_session(GenerationContext context, IterationRegime regime);
    TeacherSession get_session(const std::string& id) const;
    std::vector<TeacherSession> list_sessions() const;
    TeacherSession decide(const std::string& id, const TeacherDecision& decision);

    Executor& executor() { return *executor_; }

private:
    void start_cycle(TeacherSession& session, GenerationContext context);
    void run_cycle(const std::string& id, int index, GenerationContext context, IterationRegime regime);
    void apply(const nlohmann::json& event);
    void record(nlohmann::json event);

    llm::ChatBackend& backend_;
    std::unique_ptr<Executor> executor_;
    std::shared_ptr<SessionStore> store_;
    ManagerOptions options_;
    mutable std::mutex mutex_;
    std::map<std::string, TeacherSession> sessions_;
    std::vector<std::string> order_;
};

// ---------------------------------------------------------------------------
// HTTP
// ---------------------------------------------------------------------------

struct HttpOptions {
    std::filesystem::path runs_dir = "runs";
    std::optional<std::filesystem::path> static_dir;
};

/// JSON API over a SessionManager plus the static UI bundle.
class HttpService {
public:
    HttpService(SessionManager& manager, HttpOptions options);
    ~HttpService();

    /// Binds and serves until stop(); returns false when binding fails.
    bool listen(const std::string& host, int port);
    /// Binds to a free port and returns it; serve with listen_after_bind().
    int bind_any_port(const std::string& host);
    bool listen_after_bind();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// HTTP status for an error code: 400, 404, 409 or 500.
int http_status_for(const std::string& code);

}  // namespace socratic::service
