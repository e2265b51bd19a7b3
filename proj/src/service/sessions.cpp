#include <chrono>
#include <ctime>
#include <random>
#include <sstream>

#include "socratic/errors.hpp"
#include "socratic/experiment.hpp"
#include "socratic/serialization.hpp"
#include "socratic/service.hpp"
#include "socratic/text.hpp"

namespace socratic::service {

using nlohmann::json;

namespace {

std::string now_iso() {
    const auto now = std::chrono::system_clock::now();
    const auto t = std::chrono::system_clock::to_time_t(now);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[40];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    char out[48];
    std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
    return out;
}

std::string new_session_id() {
    static constexpr char kHex[] = "0123456789abcdef";
    static std::mutex mutex;
    static std::mt19937_64 rng{std::random_device{}()};
    std::lock_guard lock(mutex);
    std::uint64_t v = rng();
    std::string id;
    for (int i = 0; i < 16; ++i, v >>= 4) id.push_back(kHex[v & 0xF]);
    return id;
}

json regime_json(const IterationRegime& r) {
    json j{{"code", r.code()}};
    if (r.is_dynamic()) {
        j["cap"] = r.cap();
    } else {
        j["rounds"] = r.rounds();
    }
    return j;
}

IterationRegime regime_from(const json& j) {
    if (j.at("code").get<std::string>() == "DYN") return IterationRegime::dynamic(j.at("cap").get<int>());
    return IterationRegime::fixed(j.at("rounds").get<int>());
}

Decision decision_from_event(std::string_view kind) {
    if (kind == "accepted") return Decision::Accepted;
    if (kind == "edited") return Decision::Edited;
    if (kind == "reconstrained") return Decision::Reconstrained;
    throw StoreError("unknown decision kind in event log: " + std::string(kind));
}

ExperimentConfig config_for(const GenerationContext& ctx, const IterationRegime& regime) {
    return ExperimentConfig{regime, ctx.student_level.has_value(), ctx.materials.has_value()};
}

}  // namespace

std::string_view to_string(CycleStatus s) {
    switch (s) {
        case CycleStatus::Running: return "running";
        case CycleStatus::Completed: return "completed";
        case CycleStatus::Failed: return "failed";
    }
    return "running";
}

std::string_view to_string(Decision d) {
    switch (d) {
        case Decision::Pending: return "pending";
        case Decision::Accepted: return "accepted";
        case Decision::Edited: return "edited";
        case Decision::Reconstrained: return "reconstrained";
    }
    return "pending";
}

bool TeacherSession::closed() const {
    return !cycles.empty() &&
           (cycles.back().decision == Decision::Accepted || cycles.back().decision == Decision::Edited);
}

std::string TeacherSession::status() const {
    if (cycles.empty()) return "running";
    const Cycle& last = cycles.back();
    if (last.decision == Decision::Accepted) return "accepted";
    if (last.decision == Decision::Edited) return "edited";
    if (last.status == CycleStatus::Running) return "running";
    return "awaiting_decision";
}

json session_summary(const TeacherSession& s) {
    return json{{"session_id", s.id},
                {"topic", s.context.topic},
                {"status", s.status()},
                {"cycles", s.cycles.size()},
                {"final_question", s.final_question ? json(*s.final_question) : json(nullptr)},
                {"created_at", s.created_at},
                {"updated_at", s.updated_at}};
}

json to_json(const TeacherSession& s) {
    json cycles = json::array();
    for (const auto& c : s.cycles) {
        json cj{{"index", c.index},
                {"status", to_string(c.status)},
                {"decision", to_string(c.decision)},
                {"decision_text", c.decision_text ? json(*c.decision_text) : json(nullptr)},
                {"context", c.context},
                {"trace", c.trace ? json(*c.trace) : json(nullptr)},
                {"final_question", c.trace ? json(c.trace->final_question) : json(nullptr)},
                {"error", c.error_code ? json{{"code", *c.error_code}, {"message", c.error_message.value_or("")}}
                                       : json(nullptr)},
                {"started_at", c.started_at},
                {"finished_at", c.finished_at}};
        cycles.push_back(std::move(cj));
    }
    json j = session_summary(s);
    j["context"] = s.context;
    j["regime"] = regime_json(s.regime);
    j["cycles"] = std::move(cycles);
    return j;
}

TeacherDecision TeacherDecision::from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
        throw ValidationError("decision needs a string 'kind'");
    }
    TeacherDecision d;
    const std::string kind = text::to_lower_ascii(j.at("kind").get<std::string>());
    if (kind == "accept") {
        d.kind = Kind::Accept;
    } else if (kind == "edit") {
        d.kind = Kind::Edit;
    } else if (kind == "reconstrain") {
        d.kind = Kind::Reconstrain;
    } else {
        throw ValidationError("decision kind must be accept, edit or reconstrain");
    }
    if (j.contains("text") && !j.at("text").is_null()) {
        if (!j.at("text").is_string()) throw ValidationError("decision text must be a string");
        d.text = j.at("text").get<std::string>();
    }
    return d;
}

// ---------------------------------------------------------------------------

SessionStore::SessionStore(std::optional<std::filesystem::path> path) : path_(std::move(path)) {
    if (!path_) return;
    if (path_->has_parent_path()) std::filesystem::create_directories(path_->parent_path());
    if (std::filesystem::exists(*path_)) {
        std::istringstream in(read_file(*path_));
        for (std::string line; std::getline(in, line);) {
            if (text::trim(line).empty()) continue;
            try {
                events_.push_back(json::parse(line));
            } catch (const json::parse_error&) {
                // A torn final line from a crash; everything before it is intact.
            }
        }
    }
    out_.open(*path_, std::ios::app | std::ios::binary);
    if (!out_) throw StoreError("cannot open session log " + path_->string());
}

void SessionStore::append(const json& event) {
    std::lock_guard lock(mutex_);
    if (path_) {
        out_ << event.dump() << '\n';
        out_.flush();
        if (!out_) throw StoreError("cannot append to session log " + path_->string());
    }
    events_.push_back(event);
}

std::vector<json> SessionStore::events() const {
    std::lock_guard lock(mutex_);
    return events_;
}

// ---------------------------------------------------------------------------

SessionManager::SessionManager(llm::ChatBackend& backend, std::unique_ptr<Executor> executor,
                               std::shared_ptr<SessionStore> store, ManagerOptions options)
    : backend_(backend), executor_(std::move(executor)), store_(std::move(store)), options_(std::move(options)) {
    for (const auto& event : store_->events()) apply(event);

    std::lock_guard lock(mutex_);
    for (const auto& id : order_) {
        const auto& s = sessions_.at(id);
        if (!s.cycles.empty() && s.cycles.back().status == CycleStatus::Running) {
            record({{"type", "cycle_failed"},
                    {"session_id", id},
                    {"cycle", s.cycles.back().index},
                    {"error", {{"code", "Interrupted"}, {"message", "service stopped before the cycle finished"}}},
                    {"at", now_iso()}});
        }
    }
}

SessionManager::~SessionManager() { executor_->shutdown(); }

void SessionManager::record(json event) {
    store_->append(event);
    apply(event);
}

void SessionManager::apply(const json& e) {
    const std::string type = e.at("type").get<std::string>();
    const std::string id = e.at("session_id").get<std::string>();
    const std::string at = e.value("at", std::string{});

    if (type == "session_created") {
        TeacherSession s;
        s.id = id;
        s.context = load_context(e.at("context"), {});
        s.regime = regime_from(e.at("regime"));
        s.created_at = s.updated_at = at;
        if (sessions_.emplace(id, std::move(s)).second) order_.push_back(id);
        return;
    }

    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw StoreError("event for unknown session " + id);
    TeacherSession& s = it->second;
    s.updated_at = at;
    const int index = e.at("cycle").get<int>();

    if (type == "cycle_started") {
        Cycle c;
        c.index = index;
        c.context = load_context(e.at("context"), {});
        c.started_at = at;
        s.cycles.push_back(std::move(c));
        return;
    }
    if (s.cycles.empty() || s.cycles.back().index != index) {
        throw StoreError("event for cycle " + std::to_string(index) + " does not match session " + id);
    }
    Cycle& c = s.cycles.back();
    if (type == "cycle_completed") {
        c.status = CycleStatus::Completed;
        c.trace = e.at("trace").get<DialogueTrace>();
        c.finished_at = at;
    } else if (type == "cycle_failed") {
        c.status = CycleStatus::Failed;
        c.error_code = e.at("error").at("code").get<std::string>();
        c.error_message = e.at("error").value("message", std::string{});
        if (e.contains("trace") && !e.at("trace").is_null()) c.trace = e.at("trace").get<DialogueTrace>();
        c.finished_at = at;
    } else if (type == "decision") {
        c.decision = decision_from_event(e.at("kind").get<std::string>());
        if (e.contains("text") && !e.at("text").is_null()) c.decision_text = e.at("text").get<std::string>();
        if (c.decision == Decision::Accepted) s.final_question = c.trace->final_question;
        if (c.decision == Decision::Edited) s.final_question = c.decision_text;
    } else {
        throw StoreError("unknown event type '" + type + "'");
    }
}

TeacherSession SessionManager::create_session(GenerationContext context, IterationRegime regime) {
    validate(context, options_.materials_byte_budget);
    if (regime.is_dynamic() ? regime.cap() < 1 : regime.rounds() < 1) {
        throw ValidationError("iteration regime needs at least one round");
    }
    const std::string id = new_session_id();
    TeacherSession snapshot;
    {
        std::lock_guard lock(mutex_);
        record({{"type", "session_created"},
                {"session_id", id},
                {"context", context},
                {"regime", regime_json(regime)},
                {"at", now_iso()}});
        start_cycle(sessions_.at(id), context);
        snapshot = sessions_.at(id);
    }
    executor_->submit([this, id, context = std::move(context), regime] { run_cycle(id, 1, context, regime); });
    return snapshot;
}

void SessionManager::start_cycle(TeacherSession& session, GenerationContext context) {
    record({{"type", "cycle_started"},
            {"session_id", session.id},
            {"cycle", static_cast<int>(session.cycles.size()) + 1},
            {"context", std::move(context)},
            {"at", now_iso()}});
}

void SessionManager::run_cycle(const std::string& id, int index, GenerationContext context, IterationRegime regime) {
    json event{{"session_id", id}, {"cycle", index}};
    try {
        auto engine = options_.engine;
        engine.tag_prefix = "session/" + id + "/cycle" + std::to_string(index);
        const auto seed = experiment::derive_seed(options_.seed, {"session", id, "cycle:" + std::to_string(index)});
        const DialogueTrace trace =
            dialogue::run_dialogue(context, config_for(context, regime), backend_, seed, index, engine);
        event["type"] = "cycle_completed";
        event["trace"] = trace;
    } catch (const dialogue::BackendFailure& e) {
        event["type"] = "cycle_failed";
        event["error"] = {{"code", e.cause_code()}, {"message", e.what()}};
        if (e.partial_trace()) event["trace"] = *e.partial_trace();
    } catch (const Error& e) {
        event["type"] = "cycle_failed";
        event["error"] = {{"code", e.code()}, {"message", e.what()}};
    } catch (const std::exception& e) {
        event["type"] = "cycle_failed";
        event["error"] = {{"code", "InternalError"}, {"message", e.what()}};
    }
    event["at"] = now_iso();
    std::lock_guard lock(mutex_);
    record(std::move(event));
}

TeacherSession SessionManager::get_session(const std::string& id) const {
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFound("no session '" + id + "'");
    return it->second;
}

std::vector<TeacherSession> SessionManager::list_sessions() const {
    std::lock_guard lock(mutex_);
    std::vector<TeacherSession> out;
    for (const auto& id : order_) out.push_back(sessions_.at(id));
    return out;
}

TeacherSession SessionManager::decide(const std::string& id, const TeacherDecision& decision) {
    std::optional<std::pair<int, GenerationContext>> next_cycle;
    TeacherSession snapshot;
    {
        std::lock_guard lock(mutex_);
        const auto it = sessions_.find(id);
        if (it == sessions_.end()) throw NotFound("no session '" + id + "'");
        TeacherSession& s = it->second;
        if (s.closed()) throw SessionClosed("session '" + id + "' is already " + s.status());
        const Cycle& latest = s.cycles.back();
        if (latest.status == CycleStatus::Running) {
            throw CycleStillRunning("cycle " + std::to_string(latest.index) + " of session '" + id +
                                    "' is still running");
        }

        json event{{"type", "decision"}, {"session_id", id}, {"cycle", latest.index}, {"at", now_iso()}};
        switch (decision.kind) {
            case TeacherDecision::Kind::Accept:
                if (latest.status != CycleStatus::Completed) {
                    throw ValidationError("cycle " + std::to_string(latest.index) +
                                          " failed and has no question to accept; edit or reconstrain instead");
                }
                event["kind"] = "accepted";
                break;
            case TeacherDecision::Kind::Edit:
                if (text::trim(decision.text).empty()) throw ValidationError("edited question must not be empty");
                event["kind"] = "edited";
                event["text"] = decision.text;
                break;
            case TeacherDecision::Kind::Reconstrain: {
                const std::string constraint(text::trim(decision.text));
                if (constraint.empty()) throw ValidationError("new constraints must not be empty");
                event["kind"] = "reconstrained";
                event["text"] = constraint;
                GenerationContext ctx = latest.context;
                ctx.constraints.push_back(constraint);
                if (latest.trace && !latest.trace->final_question.empty()) ctx.prior_question = latest.trace->final_question;
                next_cycle.emplace(latest.index + 1, std::move(ctx));
                break;
            }
        }
        record(std::move(event));
        if (next_cycle) start_cycle(s, next_cycle->second);
        snapshot = s;
    }
    if (next_cycle) {
        executor_->submit([this, id, index = next_cycle->first, ctx = std::move(next_cycle->second),
                           regime = snapshot.regime] { run_cycle(id, index, ctx, regime); });
    }
    return snapshot;
}

}  // namespace socratic::service
