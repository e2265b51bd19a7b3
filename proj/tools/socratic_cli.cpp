// Command-line front end: generate, experiment, report, serve, replay.

#include <csignal>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "socratic/agents.hpp"
#include "socratic/dialogue.hpp"
#include "socratic/errors.hpp"
#include "socratic/experiment.hpp"
#include "socratic/llm.hpp"
#include "socratic/run_log.hpp"
#include "socratic/serialization.hpp"
#include "socratic/service.hpp"

namespace fs = std::filesystem;
using namespace socratic;

namespace {

struct GlobalFlags {
    std::optional<std::uint64_t> seed;
    std::string backend = "remote";
    std::string templates_dir;
    std::string script;
    std::string judge_script;
    std::string replay_log;
    std::string runs_dir = "runs";
    bool quiet = false;
};

struct Backends {
    std::unique_ptr<llm::ChatBackend> agents;
    std::unique_ptr<llm::ChatBackend> judge;  // null when agents serve both roles

    llm::ChatBackend& judge_backend() { return judge ? *judge : *agents; }
};

std::unique_ptr<llm::ChatBackend> make_backend(const GlobalFlags& g, const std::string& script) {
    if (g.backend == "scripted") {
        if (script.empty()) throw ValidationError("--backend scripted needs --script FILE");
        return llm::ScriptedBackend::from_script_file(script);
    }
    if (g.backend != "remote") throw ValidationError("unknown backend '" + g.backend + "'");
    return std::make_unique<llm::RemoteBackend>(llm::RemoteConfig::from_env());
}

Backends make_backends(const GlobalFlags& g) {
    Backends b;
    b.agents = make_backend(g, g.script);
    if (g.backend == "scripted" && !g.judge_script.empty()) b.judge = make_backend(g, g.judge_script);
    if (!g.replay_log.empty()) {
        auto log = std::make_shared<llm::ReplayLog>(g.replay_log);
        b.agents->set_replay_log(log);
        if (b.judge) b.judge->set_replay_log(log);
    }
    return b;
}

std::optional<agents::TemplateSet> load_templates(const GlobalFlags& g) {
    if (g.templates_dir.empty()) return std::nullopt;
    return agents::TemplateSet::load_dir(g.templates_dir);
}

GenerationContext read_context(const std::string& path) {
    return load_context(json::parse(read_file(path)), fs::path(path).parent_path());
}

int generate(const GlobalFlags& g, llm::ChatBackend& backend, const std::string& context_file,
             const std::string& regime_code, int cap, const std::string& out, RunLog& log) {
    const auto templates = load_templates(g);
    const GenerationContext ctx = read_context(context_file);
    const ExperimentConfig cfg{IterationRegime::parse(regime_code, cap), ctx.student_level.has_value(),
                               ctx.materials.has_value()};
    dialogue::EngineOptions options;
    options.templates = templates ? &*templates : nullptr;
    options.log = &log;
    options.tag_prefix = "generate";
    const std::uint64_t seed = experiment::derive_seed(g.seed.value_or(0), {"generate", cfg.label()});
    const DialogueTrace trace = dialogue::run_dialogue(ctx, cfg, backend, seed, 1, options);

    const fs::path path = out.empty() ? fs::path("traces") / (cfg.file_stem() + ".json") : fs::path(out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_file_atomic(path, json{{"config", cfg}, {"context", trace.context}, {"attempts", json::array({attempt_to_json(trace)})}}
                                .dump(2) +
                                "\n");
    std::cout << trace.final_question << "\n\ntermination: " << to_string(trace.termination)
              << "\ntrace: " << path.string() << "\n";
    return 0;
}

int run_experiment(const GlobalFlags& g, llm::ChatBackend& agents_backend, llm::ChatBackend& judge_backend,
                   const std::string& which, const std::string& plan_file, std::optional<int> parallelism, RunLog& log) {
    auto plan = experiment::load_plan(plan_file);
    if (g.seed) plan.master_seed = *g.seed;
    if (parallelism) plan.parallelism = *parallelism;
    if (g.backend == "scripted" || !g.replay_log.empty()) plan.parallelism = 1;
    experiment::validate(plan);

    const auto templates = load_templates(g);
    experiment::RunnerOptions options;
    options.runs_dir = g.runs_dir;
    options.templates = templates ? &*templates : nullptr;
    options.log = &log;

    if (which == "rq1") {
        const auto result = experiment::run_rq1(plan, agents_backend, judge_backend, options);
        for (const auto& m : result.matrices) {
            std::cout << analytics::export_matrix(m, analytics::ExportFormat::TextHeatmap) << "\n";
        }
        std::cout << "run: " << result.run_dir.string() << "\n";
    } else if (which == "rq2") {
        const auto result = experiment::run_rq2(plan, agents_backend, judge_backend, options);
        std::cout << analytics::rq2_report(result.rows, analytics::ExportFormat::TextHeatmap) << "\n";
        std::cout << "run: " << result.run_dir.string() << "\n";
    } else {
        throw ValidationError("experiment must be rq1 or rq2");
    }
    return 0;
}

service::HttpService* g_server = nullptr;

void on_signal(int) {
    if (g_server != nullptr) g_server->stop();
}

int exit_code_for(const Error& e) {
    if (e.code() == "ValidationError" || e.code() == "TemplateError") return 2;
    if (e.code() == "BudgetExceeded") return 3;
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Socratic reflection-question generator and evaluation harness"};
    app.require_subcommand(1);

    GlobalFlags g;
    app.add_option("--seed", g.seed, "Master seed (overrides a plan's master_seed)");
    app.add_option("--backend", g.backend, "Chat backend")->check(CLI::IsMember({"remote", "scripted"}));
    app.add_option("--templates", g.templates_dir, "Directory of prompt templates")->check(CLI::ExistingDirectory);
    app.add_option("--script", g.script, "Reply script for the scripted backend")->check(CLI::ExistingFile);
    app.add_option("--judge-script", g.judge_script, "Separate reply script for the evaluator")->check(CLI::ExistingFile);
    app.add_option("--replay-log", g.replay_log, "Append every request/response to this JSONL file");
    app.add_option("--runs-dir", g.runs_dir, "Directory holding experiment runs");
    app.add_flag("-q,--quiet", g.quiet, "Do not echo warnings");

    std::string context_file;
    std::string regime = "DYN";
    int cap = kDefaultDynamicCap;
    std::string out;
    auto* gen = app.add_subcommand("generate", "Run one dialogue and print the final question");
    gen->add_option("--context", context_file, "Context JSON file")->required()->check(CLI::ExistingFile);
    gen->add_option("--regime", regime, "DYN, F05, F10, ...");
    gen->add_option("--cap", cap, "Safety cap on dynamic rounds");
    gen->add_option("--out", out, "Trace output path");

    std::string which;
    std::string plan_file;
    std::optional<int> parallelism;
    auto* exp = app.add_subcommand("experiment", "Run an experiment plan");
    exp->add_option("which", which, "rq1 or rq2")->required()->check(CLI::IsMember({"rq1", "rq2"}));
    exp->add_option("--plan", plan_file, "Plan JSON file")->required()->check(CLI::ExistingFile);
    exp->add_option("--parallelism", parallelism, "Concurrent calls");

    std::string run_dir;
    std::string format = "text";
    auto* rep = app.add_subcommand("report", "Render the matrices or baseline report of a run");
    rep->add_option("--run", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
    rep->add_option("--format", format, "csv, json or text")->check(CLI::IsMember({"csv", "json", "text"}));

    int port = 8080;
    std::string host = "127.0.0.1";
    std::string static_dir;
    std::string store = "sessions.jsonl";
    std::size_t workers = 2;
    auto* serve = app.add_subcommand("serve", "Serve the teacher session API");
    serve->add_option("--port", port, "Port");
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--static", static_dir, "UI bundle directory")->check(CLI::ExistingDirectory);
    serve->add_option("--store", store, "Session event log");
    serve->add_option("--workers", workers, "Concurrent dialogue cycles");

    std::string log_file;
    std::string replay_plan;
    std::string replay_experiment = "rq1";
    std::string replay_context;
    auto* replay = app.add_subcommand("replay", "Re-run a generation or experiment from a replay log");
    replay->add_option("--log", log_file, "Replay log (JSONL)")->required()->check(CLI::ExistingFile);
    replay->add_option("--context", replay_context, "Context JSON for a single dialogue")->check(CLI::ExistingFile);
    replay->add_option("--regime", regime, "Regime for a single dialogue");
    replay->add_option("--cap", cap, "Safety cap on dynamic rounds");
    replay->add_option("--out", out, "Trace output path");
    replay->add_option("--plan", replay_plan, "Experiment plan")->check(CLI::ExistingFile);
    replay->add_option("--experiment", replay_experiment, "rq1 or rq2")->check(CLI::IsMember({"rq1", "rq2"}));

    CLI11_PARSE(app, argc, argv);

    RunLog log(g.quiet ? nullptr : &std::cerr);
    try {
        if (*gen) {
            auto backends = make_backends(g);
            return generate(g, *backends.agents, context_file, regime, cap, out, log);
        }
        if (*exp) {
            auto backends = make_backends(g);
            return run_experiment(g, *backends.agents, backends.judge_backend(), which, plan_file, parallelism, log);
        }
        if (*rep) {
            std::cout << experiment::render_report(run_dir, analytics::export_format_from_string(format));
            return 0;
        }
        if (*serve) {
            auto backends = make_backends(g);
            const auto templates = load_templates(g);
            service::ManagerOptions options;
            options.engine.templates = templates ? &*templates : nullptr;
            options.engine.log = &log;
            options.seed = g.seed.value_or(0);
            service::SessionManager manager(*backends.agents,
                                            std::make_unique<service::ThreadPoolExecutor>(workers),
                                            std::make_shared<service::SessionStore>(fs::path(store)), options);
            service::HttpOptions http;
            http.runs_dir = g.runs_dir;
            if (!static_dir.empty()) http.static_dir = fs::path(static_dir);
            service::HttpService server(manager, http);
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "listening on http://" << host << ":" << port << "\n";
            if (!server.listen(host, port)) {
                std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
                return 1;
            }
            g_server = nullptr;
            return 0;
        }
        if (*replay) {
            auto backend = llm::ScriptedBackend::from_replay_log(log_file);
            if (!replay_plan.empty()) {
                GlobalFlags replay_flags = g;
                replay_flags.backend = "scripted";
                return run_experiment(replay_flags, *backend, *backend, replay_experiment, replay_plan, 1, log);
            }
            if (replay_context.empty()) throw ValidationError("replay needs --context or --plan");
            return generate(g, *backend, replay_context, regime, cap, out, log);
        }
    } catch (const Error& e) {
        std::cerr << "error: [" << e.code() << "] " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
