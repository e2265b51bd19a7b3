#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "socratic/dialogue.hpp"
#include "socratic/experiment.hpp"
#include "socratic/judge.hpp"
#include "socratic/run_log.hpp"
#include "socratic/serialization.hpp"
#include "socratic/text.hpp"

namespace socratic::experiment {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kJudgedCellPolicy =
    "Only unordered config pairs are judged; each cell holds k*k cross pairs judged once with a random "
    "display position, and the mirror cell is derived as 1 - gamma.";
constexpr std::string_view kEvaluationCountNote =
    "A 12-config sweep with k=5 judges 66 cells x 25 = 1,650 comparisons per criterion (6,600 over four "
    "criteria). Counting both triangles of one criterion's 132 cells instead gives 3,300.";
constexpr std::string_view kSeedDerivation =
    "sha256(le64(master_seed) || for each label: le64(len) || label), first 8 bytes as le64";

std::string iso_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::int64_t epoch_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

json usage_json(const llm::TokenUsage& u, std::int64_t calls) {
    return json{{"calls", calls},
                {"prompt_tokens", u.prompt_tokens},
                {"completion_tokens", u.completion_tokens},
                {"total_tokens", u.prompt_tokens + u.completion_tokens}};
}

std::string join_path(const std::vector<std::string>& path) { return text::join(path, "/"); }

/// Runs tasks on up to `parallelism` threads; the first failure stops new
/// tasks from starting and is rethrown once running ones finish.
void run_tasks(const std::vector<std::function<void()>>& tasks, int parallelism) {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&] {
        while (!stop.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                tasks[i]();
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                stop = true;
            }
        }
    };
    const auto workers = static_cast<std::size_t>(std::max(1, parallelism));
    if (workers == 1 || tasks.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (std::size_t t = 0; t < std::min(workers, tasks.size()); ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

/// One trace file: {config, context, attempts:[...]} with attempts kept
/// sorted by attempt_id so the file does not depend on completion order.
class TraceFile {
public:
    TraceFile(fs::path path, json config, json context)
        : path_(std::move(path)), config_(std::move(config)), context_(std::move(context)) {
        if (!fs::exists(path_)) return;
        const json doc = json::parse(read_file(path_));
        for (const auto& attempt : doc.at("attempts")) attempts_[attempt.at("attempt_id").get<int>()] = attempt;
    }

    bool has(int attempt_id) const { return attempts_.count(attempt_id) != 0; }
    const json& get(int attempt_id) const { return attempts_.at(attempt_id); }
    std::size_t size() const { return attempts_.size(); }

    /// Adds coaching-turn counts per termination reason into `out`.
    void add_rounds(json& out) const {
        for (const auto& [id, a] : attempts_) {
            if (!a.contains("termination")) continue;  // one-shot attempts
            int coaching = 0;
            for (const auto& it : a.at("iterations")) {
                if (it.contains("teacher") && !it.at("teacher").value("approval", false)) ++coaching;
            }
            json& bucket = out[a.at("termination").get<std::string>()];
            if (bucket.is_null()) bucket = json::object();
            const std::string key = std::to_string(coaching);
            bucket[key] = bucket.value(key, 0) + 1;
        }
    }

    void put(int attempt_id, json attempt) {
        attempts_[attempt_id] = std::move(attempt);
        json list = json::array();
        for (const auto& [id, a] : attempts_) list.push_back(a);
        write_file_atomic(path_, json{{"config", config_}, {"context", context_}, {"attempts", std::move(list)}}.dump(2) +
                                     "\n");
    }

private:
    fs::path path_;
    json config_;
    json context_;
    std::map<int, json> attempts_;
};

/// Append-only judgments log. Lines that fail to parse (a torn tail after a
/// crash) are dropped by `repair`.
class JudgmentLog {
public:
    explicit JudgmentLog(fs::path path) : path_(std::move(path)) {
        if (!fs::exists(path_)) return;
        std::istringstream in(read_file(path_));
        for (std::string line; std::getline(in, line);) {
            if (text::trim(line).empty()) continue;
            try {
                add(judge::record_from_json(json::parse(line)));
                lines_.push_back(line);
            } catch (const std::exception&) {
                ++dropped_;
            }
        }
    }

    std::size_t dropped() const { return dropped_; }

    void repair() {
        if (dropped_ == 0) return;
        std::string contents;
        for (const auto& line : lines_) contents += line + "\n";
        write_file_atomic(path_, contents);
        dropped_ = 0;
    }

    bool contains(const std::string& seed_path) const {
        std::lock_guard lock(mutex_);
        return seen_.count(seed_path) != 0;
    }

    void append(const judge::JudgmentRecord& record) {
        const std::string line = judge::to_json(record).dump();
        std::lock_guard lock(mutex_);
        std::ofstream out(path_, std::ios::app | std::ios::binary);
        out << line << '\n';
        out.flush();
        if (!out) throw StoreError("cannot append to " + path_.string());
        add_locked(record);
    }

    std::vector<judge::JudgmentRecord> records() const {
        std::lock_guard lock(mutex_);
        return records_;
    }

private:
    void add(const judge::JudgmentRecord& r) {
        std::lock_guard lock(mutex_);
        add_locked(r);
    }
    void add_locked(const judge::JudgmentRecord& r) {
        if (seen_.insert(r.seed_path).second) records_.push_back(r);
    }

    fs::path path_;
    mutable std::mutex mutex_;
    std::vector<judge::JudgmentRecord> records_;
    std::vector<std::string> lines_;
    std::unordered_set<std::string> seen_;
    std::size_t dropped_ = 0;
};

/// Installs a ledger on both backends for the duration of a run.
class LedgerScope {
public:
    LedgerScope(llm::ChatBackend& a, llm::ChatBackend& b, std::shared_ptr<llm::CostLedger> ledger)
        : a_(a), b_(b), prev_a_(a.cost_ledger()), prev_b_(b.cost_ledger()) {
        a_.set_cost_ledger(ledger);
        b_.set_cost_ledger(ledger);
    }
    ~LedgerScope() {
        a_.set_cost_ledger(prev_a_);
        b_.set_cost_ledger(prev_b_);
    }
    LedgerScope(const LedgerScope&) = delete;
    LedgerScope& operator=(const LedgerScope&) = delete;

private:
    llm::ChatBackend& a_;
    llm::ChatBackend& b_;
    std::shared_ptr<llm::CostLedger> prev_a_;
    std::shared_ptr<llm::CostLedger> prev_b_;
};

// ---------------------------------------------------------------------------
// Shared run state
// ---------------------------------------------------------------------------

class Run {
public:
    Run(std::string experiment, const ExperimentPlan& plan, llm::ChatBackend& agents, llm::ChatBackend& judge,
        const RunnerOptions& options)
        : experiment_(std::move(experiment)),
          plan_(plan),
          agents_(agents),
          judge_(judge),
          options_(options),
          id_(run_id(experiment_, plan)),
          dir_(options.runs_dir / id_),
          started_at_(iso_now()) {
        validate(plan_);
        fs::create_directories(dir_ / "traces");
        const std::string hash = plan_hash(plan_);
        const fs::path plan_file = dir_ / "plan.json";
        if (fs::exists(plan_file)) {
            const json stored = json::parse(read_file(plan_file));
            if (stored.value("plan_hash", std::string{}) != hash) {
                throw StoreError("run directory " + dir_.string() + " belongs to a different plan");
            }
        } else {
            json doc = plan_to_json(plan_);
            doc["plan_hash"] = hash;
            doc["experiment"] = experiment_;
            write_file_atomic(plan_file, doc.dump(2) + "\n");
        }

        prior_cost_ = json::object();
        const fs::path manifest_file = dir_ / "manifest.json";
        if (fs::exists(manifest_file)) {
            const json prior = json::parse(read_file(manifest_file));
            if (prior.contains("cost") && prior.at("cost").contains("cumulative")) {
                prior_cost_ = prior.at("cost").at("cumulative");
            }
        }
        std::optional<std::int64_t> remaining;
        if (plan_.budget_tokens) remaining = *plan_.budget_tokens - prior_cost_.value("total_tokens", std::int64_t{0});
        ledger_ = std::make_shared<llm::CostLedger>(remaining);

        judgments_ = std::make_unique<JudgmentLog>(dir_ / "judgments.jsonl");
        if (judgments_->dropped() > 0) {
            if (options_.log != nullptr) {
                options_.log->warn("judgment_log_repaired", std::to_string(judgments_->dropped()) +
                                                               " unreadable line(s) dropped from judgments.jsonl");
            }
            judgments_->repair();
        }

        engine_.student = agents::AgentSettings{plan_.backbone_model, 0.7, 1024};
        engine_.educator = agents::AgentSettings{plan_.backbone_model, 0.7, 1024};
        engine_.max_tries = options_.max_tries;
        engine_.templates = options_.templates;
        engine_.log = options_.log;
        engine_.tag_prefix = experiment_ + "/dialogue";

        judge_options_.evaluator = agents::AgentSettings{plan_.evaluator_model, 0.0, 512};
        judge_options_.max_tries = options_.max_tries;
        judge_options_.templates = options_.templates;
        judge_options_.tag_prefix = experiment_ + "/judge";
    }

    const std::string& id() const { return id_; }
    const std::string& experiment() const { return experiment_; }
    const fs::path& dir() const { return dir_; }
    const ExperimentPlan& plan() const { return plan_; }
    JudgmentLog& judgments() { return *judgments_; }
    const std::shared_ptr<llm::CostLedger>& ledger() const { return ledger_; }
    llm::ChatBackend& agents() { return agents_; }
    llm::ChatBackend& judge_backend() { return judge_; }
    const dialogue::EngineOptions& engine() const { return engine_; }
    const judge::JudgeOptions& judge_options() const { return judge_options_; }
    std::mutex& trace_mutex() { return trace_mutex_; }
    RunLog* log() const { return options_.log; }

    /// Times a phase and records its token spend.
    template <typename Fn>
    void phase(const std::string& name, Fn&& fn) {
        const auto before = ledger_->totals();
        const auto calls_before = ledger_->calls();
        const auto t0 = std::chrono::steady_clock::now();
        const auto finish = [&] {
            const auto after = ledger_->totals();
            phase_cost_[name] = usage_json({after.prompt_tokens - before.prompt_tokens,
                                            after.completion_tokens - before.completion_tokens},
                                           ledger_->calls() - calls_before);
            phase_ms_[name] = std::chrono::duration_cast<std::chrono::milliseconds>(
                                  std::chrono::steady_clock::now() - t0)
                                  .count();
        };
        try {
            fn();
        } catch (...) {
            finish();
            throw;
        }
        finish();
    }

    json manifest(bool complete, const json& counts, const json& expected) const {
        const auto totals = ledger_->totals();
        const json session = usage_json(totals, ledger_->calls());
        json cumulative = session;
        for (const char* key : {"calls", "prompt_tokens", "completion_tokens", "total_tokens"}) {
            cumulative[key] = session.at(key).get<std::int64_t>() + prior_cost_.value(key, std::int64_t{0});
        }
        json phases_ms = json::object();
        for (const auto& [k, v] : phase_ms_) phases_ms[k + "_ms"] = v;
        phases_ms["started_at"] = started_at_;
        phases_ms["updated_at"] = iso_now();
        return json{{"run_id", id_},
                    {"experiment", experiment_},
                    {"plan_hash", plan_hash(plan_)},
                    {"status", complete ? "complete" : "incomplete"},
                    {"models", {{"backbone", plan_.backbone_model}, {"evaluator", plan_.evaluator_model}}},
                    {"master_seed", plan_.master_seed},
                    {"seed_derivation", kSeedDerivation},
                    {"counts", counts},
                    {"expected", expected},
                    {"judged_cell_policy", kJudgedCellPolicy},
                    {"notes", json::array({kEvaluationCountNote})},
                    {"cost",
                     {{"budget_tokens", plan_.budget_tokens ? json(*plan_.budget_tokens) : json(nullptr)},
                      {"session", session},
                      {"phases", phase_cost_},
                      {"cumulative", cumulative}}},
                    {"timings", phases_ms}};
    }

    void write_manifest(const json& manifest) const {
        write_file_atomic(dir_ / "manifest.json", manifest.dump(2) + "\n");
    }

private:
    std::string experiment_;
    const ExperimentPlan& plan_;
    llm::ChatBackend& agents_;
    llm::ChatBackend& judge_;
    RunnerOptions options_;
    std::string id_;
    fs::path dir_;
    std::string started_at_;
    json prior_cost_;
    std::shared_ptr<llm::CostLedger> ledger_;
    std::unique_ptr<JudgmentLog> judgments_;
    dialogue::EngineOptions engine_;
    judge::JudgeOptions judge_options_;
    std::mutex trace_mutex_;
    json phase_cost_ = json::object();
    std::map<std::string, std::int64_t> phase_ms_;
};

/// Rethrows component errors with their coordinates; budget errors pass
/// through untouched.
template <typename Fn>
void at(const std::string& coordinates, Fn&& fn) {
    try {
        fn();
    } catch (const BudgetExceeded&) {
        throw;
    } catch (const ExperimentFailure&) {
        throw;
    } catch (const Error& e) {
        throw ExperimentFailure(coordinates, e);
    }
}

std::string question_id(std::string_view prefix, int attempt) { return std::string(prefix) + "#" + std::to_string(attempt); }

/// Adds one dialogue task per missing attempt of `cfg`.
void schedule_dialogues(Run& run, const ExperimentConfig& cfg, TraceFile& file, std::vector<std::function<void()>>& tasks) {
    const int k = run.plan().questions_per_config;
    for (int attempt = 1; attempt <= k; ++attempt) {
        if (file.has(attempt)) continue;
        tasks.emplace_back([&run, &file, cfg, attempt] {
            const std::string label = cfg.label();
            at("dialogue " + label + " attempt " + std::to_string(attempt), [&] {
                const auto seed = derive_seed(run.plan().master_seed,
                                              {run.experiment(), "dialogue", label, "attempt:" + std::to_string(attempt)});
                const DialogueTrace trace =
                    dialogue::run_dialogue(run.plan().context, cfg, run.agents(), seed, attempt, run.engine());
                std::lock_guard lock(run.trace_mutex());
                file.put(attempt, attempt_to_json(trace));
            });
        });
    }
}

QuestionSet collect_dialogue_questions(const std::string& id_prefix, const ExperimentConfig& cfg, const TraceFile& file,
                                       int k) {
    QuestionSet set{cfg.label(), {}};
    for (int attempt = 1; attempt <= k; ++attempt) {
        set.questions.push_back({question_id(id_prefix, attempt),
                                 file.get(attempt).at("final_question").get<std::string>(),
                                 "traces/" + cfg.file_stem() + ".json#attempt" + std::to_string(attempt)});
    }
    return set;
}

/// Adds k*k judgment tasks for one cell. Pair index p = i*k + j.
void schedule_cell(Run& run, Criterion criterion, const std::string& cell_label, const std::string& alpha_config,
                   const std::string& beta_config, const QuestionSet& alpha, const QuestionSet& beta,
                   const std::string& experiment, std::vector<std::function<void()>>& tasks) {
    const std::size_t k = alpha.questions.size();
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < beta.questions.size(); ++j) {
            const std::vector<std::string> path{experiment, std::string(slug(criterion)), cell_label,
                                                "pair:" + std::to_string(i * k + j)};
            const std::string seed_path = join_path(path);
            if (run.judgments().contains(seed_path)) continue;
            tasks.emplace_back([&run, criterion, path, seed_path, alpha_config, beta_config, a = alpha.questions[i],
                                b = beta.questions[j]] {
                at("judgment " + seed_path, [&] {
                    std::mt19937_64 rng(derive_seed(run.plan().master_seed, path));
                    judge::JudgmentRecord record;
                    record.judgment = judge::judge_pair({a.id, a.text}, {b.id, b.text}, criterion, run.plan().context.topic,
                                                        run.plan().context.concepts, run.judge_backend(), rng,
                                                        run.judge_options());
                    record.alpha_config = alpha_config;
                    record.beta_config = beta_config;
                    record.seed_path = seed_path;
                    record.timestamp_ms = epoch_ms();
                    run.judgments().append(record);
                });
            });
        }
    }
}

json judgment_counts(const std::vector<judge::JudgmentRecord>& records, const std::vector<Criterion>& criteria) {
    json per = json::object();
    for (const auto c : criteria) per[std::string(slug(c))] = 0;
    for (const auto& r : records) {
        const std::string key(slug(r.judgment.criterion));
        per[key] = per.value(key, 0) + 1;
    }
    return per;
}

std::vector<analytics::PreferenceMatrix> aggregate_rq1(const ExperimentPlan& plan,
                                                       const std::vector<judge::JudgmentRecord>& records) {
    std::vector<analytics::PreferenceMatrix> matrices;
    for (const auto criterion : plan.criteria) {
        std::map<std::pair<std::string, std::string>, std::vector<int>> cells;
        for (const auto& r : records) {
            if (r.judgment.criterion != criterion) continue;
            cells[{r.alpha_config, r.beta_config}].push_back(r.judgment.d_oriented);
        }
        std::vector<analytics::CellJudgments> list;
        for (auto& [key, scores] : cells) {
            list.push_back({ExperimentConfig::parse_label(key.first, plan.dynamic_cap),
                            ExperimentConfig::parse_label(key.second, plan.dynamic_cap), std::move(scores)});
        }
        // Labels do not carry the dynamic cap; map them back onto the plan's configs.
        for (auto& cell : list) {
            for (const auto& cfg : plan.configs) {
                if (cfg.label() == cell.alpha.label()) cell.alpha = cfg;
                if (cfg.label() == cell.beta.label()) cell.beta = cfg;
            }
        }
        matrices.push_back(analytics::build_matrix(plan.configs, criterion, list));
    }
    return matrices;
}

std::vector<ExperimentConfig> rq2_dialogue_configs(const ExperimentPlan& plan) {
    std::vector<ExperimentConfig> configs;
    for (const auto& flags : analytics::rq2_row_order()) {
        configs.push_back({IterationRegime::dynamic(plan.dynamic_cap), flags.level, flags.materials});
    }
    return configs;
}

std::string flags_suffix(const ExperimentConfig& cfg) {
    return std::string("L") + (cfg.level_provided ? "1" : "0") + "/M" + (cfg.materials_provided ? "1" : "0");
}

std::vector<analytics::Rq2Row> aggregate_rq2(const ExperimentPlan& plan,
                                             const std::vector<judge::JudgmentRecord>& records) {
    std::vector<analytics::Rq2Row> rows;
    for (const auto& cfg : rq2_dialogue_configs(plan)) {
        analytics::Rq2Row row;
        row.flags = {cfg.level_provided, cfg.materials_provided};
        for (std::size_t c = 0; c < kAllCriteria.size(); ++c) {
            std::vector<int> scores;
            for (const auto& r : records) {
                if (r.judgment.criterion == kAllCriteria[c] && r.alpha_config == cfg.label()) {
                    scores.push_back(r.judgment.d_oriented);
                }
            }
            if (!scores.empty()) row.gamma[c] = analytics::gamma(scores);
        }
        rows.push_back(row);
    }
    return rows;
}

json read_json(const fs::path& path) {
    if (!fs::exists(path)) throw StoreError("missing " + path.string());
    return json::parse(read_file(path));
}

std::vector<judge::JudgmentRecord> read_judgments(const fs::path& run_dir) {
    return JudgmentLog(run_dir / "judgments.jsonl").records();
}

}  // namespace

// ---------------------------------------------------------------------------

Rq1Result run_rq1(const ExperimentPlan& plan, llm::ChatBackend& agents_backend, llm::ChatBackend& judge_backend,
                  const RunnerOptions& options) {
    if (plan.configs.size() < 2) throw ValidationError("a configuration sweep needs at least two configs");
    Run run("rq1", plan, agents_backend, judge_backend, options);
    LedgerScope ledger_scope(agents_backend, judge_backend, run.ledger());
    const int k = plan.questions_per_config;

    std::vector<std::unique_ptr<TraceFile>> files;
    for (const auto& cfg : plan.configs) {
        files.push_back(std::make_unique<TraceFile>(run.dir() / "traces" / (cfg.file_stem() + ".json"), json(cfg),
                                                    json(context_view(plan.context, cfg))));
    }

    const auto counts = [&] {
        std::size_t dialogues = 0;
        for (const auto& f : files) dialogues += f->size();
        const auto per = judgment_counts(run.judgments().records(), plan.criteria);
        std::size_t total = 0;
        for (const auto& [key, v] : per.items()) total += v.get<std::size_t>();
        json rounds = json::object();
        for (std::size_t i = 0; i < files.size(); ++i) {
            if (plan.configs[i].regime.is_dynamic()) files[i]->add_rounds(rounds);
        }
        return json{{"configs", plan.configs.size()},
                    {"questions_per_config", k},
                    {"dialogues", dialogues},
                    {"dynamic_rounds", rounds},
                    {"judgments", per},
                    {"judgments_total", total}};
    };
    const std::size_t n = plan.configs.size();
    const std::size_t per_criterion = n * (n - 1) / 2 * static_cast<std::size_t>(k * k);
    json expected_per = json::object();
    for (const auto c : plan.criteria) expected_per[std::string(slug(c))] = per_criterion;
    const json expected{{"dialogues", n * static_cast<std::size_t>(k)},
                        {"cells_per_criterion", n * (n - 1) / 2},
                        {"judgments", expected_per},
                        {"judgments_total", per_criterion * plan.criteria.size()}};

    Rq1Result result;
    try {
        run.phase("generation", [&] {
            std::vector<std::function<void()>> tasks;
            for (std::size_t c = 0; c < n; ++c) schedule_dialogues(run, plan.configs[c], *files[c], tasks);
            run_tasks(tasks, plan.parallelism);
        });

        for (std::size_t c = 0; c < n; ++c) {
            result.question_sets.push_back(collect_dialogue_questions(plan.configs[c].label(), plan.configs[c], *files[c], k));
        }

        run.phase("judging", [&] {
            std::vector<std::function<void()>> tasks;
            for (const auto criterion : plan.criteria) {
                for (std::size_t a = 0; a < n; ++a) {
                    for (std::size_t b = a + 1; b < n; ++b) {
                        schedule_cell(run, criterion, "cell:" + std::to_string(a) + ":" + std::to_string(b),
                                      plan.configs[a].label(), plan.configs[b].label(), result.question_sets[a],
                                      result.question_sets[b], "rq1", tasks);
                    }
                }
            }
            run_tasks(tasks, plan.parallelism);
        });
    } catch (...) {
        run.write_manifest(run.manifest(false, counts(), expected));
        throw;
    }

    result.matrices = aggregate_rq1(plan, run.judgments().records());
    fs::create_directories(run.dir() / "matrices");
    for (const auto& m : result.matrices) {
        const std::string stem = std::string(slug(m.criterion()));
        write_file_atomic(run.dir() / "matrices" / (stem + ".csv"), analytics::export_matrix(m, analytics::ExportFormat::Csv));
        write_file_atomic(run.dir() / "matrices" / (stem + ".json"), analytics::export_matrix(m, analytics::ExportFormat::Json));
        write_file_atomic(run.dir() / "matrices" / (stem + ".txt"),
                          analytics::export_matrix(m, analytics::ExportFormat::TextHeatmap));
    }
    result.manifest = run.manifest(true, counts(), expected);
    run.write_manifest(result.manifest);
    result.run_id = run.id();
    result.run_dir = run.dir();
    return result;
}

Rq2Result run_rq2(const ExperimentPlan& plan, llm::ChatBackend& agents_backend, llm::ChatBackend& judge_backend,
                  const RunnerOptions& options) {
    Run run("rq2", plan, agents_backend, judge_backend, options);
    LedgerScope ledger_scope(agents_backend, judge_backend, run.ledger());
    const int k = plan.questions_per_config;
    const auto configs = rq2_dialogue_configs(plan);

    std::vector<std::unique_ptr<TraceFile>> dyn_files;
    std::vector<std::unique_ptr<TraceFile>> oneshot_files;
    for (const auto& cfg : configs) {
        const json view = context_view(plan.context, cfg);
        dyn_files.push_back(
            std::make_unique<TraceFile>(run.dir() / "traces" / (cfg.file_stem() + ".json"), json(cfg), view));
        const std::string stem = "oneshot_L" + std::string(cfg.level_provided ? "1" : "0") + "M" +
                                 (cfg.materials_provided ? "1" : "0");
        oneshot_files.push_back(std::make_unique<TraceFile>(
            run.dir() / "traces" / (stem + ".json"),
            json{{"label", "oneshot/" + flags_suffix(cfg)}, {"level", cfg.level_provided}, {"materials", cfg.materials_provided}},
            view));
    }

    const auto counts = [&] {
        std::size_t dialogues = 0;
        std::size_t one_shot = 0;
        for (const auto& f : dyn_files) dialogues += f->size();
        for (const auto& f : oneshot_files) one_shot += f->size();
        const auto per = judgment_counts(run.judgments().records(), {kAllCriteria.begin(), kAllCriteria.end()});
        std::size_t total = 0;
        for (const auto& [key, v] : per.items()) total += v.get<std::size_t>();
        json rounds = json::object();
        for (const auto& f : dyn_files) f->add_rounds(rounds);
        return json{{"conditions", configs.size()},
                    {"questions_per_config", k},
                    {"dialogues", dialogues},
                    {"dynamic_rounds", rounds},
                    {"one_shot", one_shot},
                    {"judgments", per},
                    {"judgments_total", total}};
    };
    const std::size_t per_criterion = configs.size() * static_cast<std::size_t>(k * k);
    json expected_per = json::object();
    for (const auto c : kAllCriteria) expected_per[std::string(slug(c))] = per_criterion;
    const json expected{{"dialogues", configs.size() * static_cast<std::size_t>(k)},
                        {"one_shot", configs.size() * static_cast<std::size_t>(k)},
                        {"judgments", expected_per},
                        {"judgments_total", per_criterion * kAllCriteria.size()}};

    Rq2Result result;
    std::vector<QuestionSet> baseline_sets;
    try {
        run.phase("generation", [&] {
            std::vector<std::function<void()>> tasks;
            for (std::size_t c = 0; c < configs.size(); ++c) {
                schedule_dialogues(run, configs[c], *dyn_files[c], tasks);
                for (int attempt = 1; attempt <= k; ++attempt) {
                    if (oneshot_files[c]->has(attempt)) continue;
                    tasks.emplace_back([&run, &file = *oneshot_files[c], cfg = configs[c], attempt] {
                        const std::string label = "oneshot/" + flags_suffix(cfg);
                        at("one-shot " + label + " attempt " + std::to_string(attempt), [&] {
                            const auto seed = derive_seed(run.plan().master_seed,
                                                          {"rq2", "oneshot", label, "attempt:" + std::to_string(attempt)});
                            auto options = run.engine();
                            options.tag_prefix = "rq2/attempt" + std::to_string(attempt);
                            const StudentTurn turn = dialogue::one_shot_generate(run.plan().context, cfg, run.agents(), options);
                            std::lock_guard lock(run.trace_mutex());
                            file.put(attempt, json{{"attempt_id", attempt},
                                                   {"seed", seed},
                                                   {"question", turn.question},
                                                   {"rationale", turn.rationale},
                                                   {"raw", turn.raw_reply},
                                                   {"rejected", turn.rejected_replies}});
                        });
                    });
                }
            }
            run_tasks(tasks, plan.parallelism);
        });

        for (std::size_t c = 0; c < configs.size(); ++c) {
            const std::string suffix = flags_suffix(configs[c]);
            result.question_sets.push_back(collect_dialogue_questions("RinR/" + suffix, configs[c], *dyn_files[c], k));
            QuestionSet baseline{"oneshot/" + suffix, {}};
            for (int attempt = 1; attempt <= k; ++attempt) {
                baseline.questions.push_back({question_id("oneshot/" + suffix, attempt),
                                              oneshot_files[c]->get(attempt).at("question").get<std::string>(),
                                              "traces/oneshot_" + suffix.substr(0, 2) + suffix.substr(3) +
                                                  ".json#attempt" + std::to_string(attempt)});
            }
            baseline_sets.push_back(std::move(baseline));
        }

        run.phase("judging", [&] {
            std::vector<std::function<void()>> tasks;
            for (const auto criterion : kAllCriteria) {
                for (std::size_t c = 0; c < configs.size(); ++c) {
                    const std::string suffix = flags_suffix(configs[c]);
                    schedule_cell(run, criterion, "cond:" + suffix.substr(0, 2) + suffix.substr(3), configs[c].label(),
                                  "oneshot/" + suffix, result.question_sets[c], baseline_sets[c], "rq2", tasks);
                }
            }
            run_tasks(tasks, plan.parallelism);
        });
    } catch (...) {
        run.write_manifest(run.manifest(false, counts(), expected));
        throw;
    }
    result.question_sets.insert(result.question_sets.end(), baseline_sets.begin(), baseline_sets.end());

    result.rows = aggregate_rq2(plan, run.judgments().records());
    write_file_atomic(run.dir() / "report.txt", analytics::rq2_report(result.rows, analytics::ExportFormat::TextHeatmap));
    write_file_atomic(run.dir() / "report.csv", analytics::rq2_report(result.rows, analytics::ExportFormat::Csv));
    write_file_atomic(run.dir() / "report.json", analytics::rq2_report(result.rows, analytics::ExportFormat::Json));
    result.manifest = run.manifest(true, counts(), expected);
    run.write_manifest(result.manifest);
    result.run_id = run.id();
    result.run_dir = run.dir();
    return result;
}

// ---------------------------------------------------------------------------

std::vector<analytics::PreferenceMatrix> load_rq1_matrices(const fs::path& run_dir) {
    const json stored = read_json(run_dir / "plan.json");
    if (stored.value("experiment", std::string{}) != "rq1") throw ValidationError(run_dir.string() + " is not an rq1 run");
    return aggregate_rq1(plan_from_json(stored, run_dir), read_judgments(run_dir));
}

std::vector<analytics::Rq2Row> load_rq2_rows(const fs::path& run_dir) {
    const json stored = read_json(run_dir / "plan.json");
    if (stored.value("experiment", std::string{}) != "rq2") throw ValidationError(run_dir.string() + " is not an rq2 run");
    return aggregate_rq2(plan_from_json(stored, run_dir), read_judgments(run_dir));
}

std::string render_report(const fs::path& run_dir, analytics::ExportFormat format) {
    const json stored = read_json(run_dir / "plan.json");
    const std::string experiment = stored.value("experiment", std::string{});
    if (experiment == "rq2") return analytics::rq2_report(load_rq2_rows(run_dir), format);
    if (experiment != "rq1") throw ValidationError(run_dir.string() + " does not hold a known experiment");

    const auto matrices = load_rq1_matrices(run_dir);
    if (format == analytics::ExportFormat::Json) {
        json all = json::array();
        for (const auto& m : matrices) all.push_back(json::parse(analytics::export_matrix(m, format)));
        return all.dump(2) + "\n";
    }
    std::string out;
    for (std::size_t i = 0; i < matrices.size(); ++i) {
        if (i > 0) out += "\n";
        if (format == analytics::ExportFormat::Csv) out += "# " + std::string(slug(matrices[i].criterion())) + "\n";
        out += analytics::export_matrix(matrices[i], format);
    }
    return out;
}

}  // namespace socratic::experiment
