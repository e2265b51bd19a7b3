#include <gtest/gtest.h>

#include <atomic>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "fakes.hpp"
#include "socratic/experiment.hpp"
#include "socratic/judge.hpp"
#include "socratic/run_log.hpp"
#include "socratic/serialization.hpp"

using namespace socratic;
using namespace socratic::experiment;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ExperimentConfig cfg(std::string_view label) { return ExperimentConfig::parse_label(label); }

ExperimentPlan small_plan(std::vector<ExperimentConfig> configs, int k) {
    ExperimentPlan plan;
    plan.context = fakes::sample_context();
    plan.configs = std::move(configs);
    plan.questions_per_config = k;
    plan.master_seed = 17;
    return plan;
}

/// Owners look like "DYN/L1/M1#2"; the config label is everything before '#'.
std::string owner_label(const std::string& owner) { return owner.substr(0, owner.find('#')); }
int owner_attempt(const std::string& owner) { return std::stoi(owner.substr(owner.find('#') + 1)); }

/// Prefers the question whose config has the higher strength; magnitude 2
/// when both questions come from the same attempt number, else 1.
std::unique_ptr<llm::CallbackBackend> strength_judge(std::map<std::string, int> strength) {
    return fakes::make_judge_backend([strength](const std::string& q1, const std::string& q2) {
        const int mag = owner_attempt(q1) == owner_attempt(q2) ? 2 : 1;
        return strength.at(owner_label(q1)) > strength.at(owner_label(q2)) ? -mag : mag;
    });
}

std::map<std::string, std::string> read_tree(const fs::path& dir, const std::vector<std::string>& subdirs) {
    std::map<std::string, std::string> files;
    for (const auto& sub : subdirs) {
        if (!fs::exists(dir / sub)) continue;
        for (const auto& entry : fs::directory_iterator(dir / sub)) {
            files[sub + "/" + entry.path().filename().string()] = fakes::slurp(entry.path());
        }
    }
    return files;
}

/// Wraps another backend and fails with BackendUnavailable after `ok` calls.
class FailingAfter final : public llm::ChatBackend {
public:
    FailingAfter(llm::ChatBackend& inner, int ok) : inner_(inner), remaining_(ok) {}

private:
    llm::ChatResponse do_complete(const llm::ChatRequest& req) override {
        if (remaining_-- <= 0) throw BackendUnavailable("stub outage");
        return inner_.complete(req);
    }
    llm::ChatBackend& inner_;
    std::atomic<int> remaining_;
};

}  // namespace

TEST(Seeds, MatchReferenceValues) {
    // Reference values computed with an independent SHA-256 implementation.
    EXPECT_EQ(derive_seed(0, {"rq1", "dialogue", "DYN/L1/M1", "attempt:1"}), 3955021259710612988ull);
    EXPECT_EQ(derive_seed(42, {"rq1", "clarity", "cell:0:1", "pair:3"}), 2170165845504337326ull);
    EXPECT_EQ(derive_seed(42, {"ab", "c"}), 3021482836561938603ull);
    EXPECT_EQ(derive_seed(42, {"a", "bc"}), 3571909761233382956ull);
    EXPECT_THROW(derive_seed(1, {}), ValidationError);
}

TEST(Seeds, DeterministicAndMasterSensitive) {
    const std::vector<std::string> path{"rq2", "depth", "cond:L1M0", "pair:7"};
    EXPECT_EQ(derive_seed(5, path), derive_seed(5, path));
    int differing = 0;
    for (std::uint64_t m = 0; m < 1000; ++m) differing += derive_seed(m, path) != derive_seed(m + 1, path) ? 1 : 0;
    EXPECT_EQ(differing, 1000);
}

TEST(Seeds, NoCollisionsOverAMillionPaths) {
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(1'100'000);
    const char* criteria[] = {"clarity", "relevance", "depth", "overall_quality"};
    for (int c = 0; c < 4; ++c) {
        for (int cell = 0; cell < 250; ++cell) {
            for (int pair = 0; pair < 1000; ++pair) {
                seen.insert(derive_seed(99, {"rq1", criteria[c], "cell:" + std::to_string(cell), "pair:" + std::to_string(pair)}));
            }
        }
    }
    EXPECT_EQ(seen.size(), 1'000'000u);
}

TEST(Plan, LoadFromFileWithRelativePaths) {
    const auto dir = fakes::fresh_dir("plan");
    write_file_atomic(dir / "concepts.txt", "IP address\nrouter\n");
    write_file_atomic(dir / "notes.md", "Routers forward packets.");
    write_file_atomic(dir / "plan.json", R"({
        "context": {"topic": "Networks", "concepts_file": "concepts.txt", "level": "grade 8",
                    "materials": [{"path": "notes.md"}]},
        "configs": ["DYN/L1/M1", {"regime": "F05", "level": false, "materials": true}],
        "questions_per_config": 2,
        "criteria": ["clarity", "Overall Quality"],
        "master_seed": 7,
        "dynamic_cap": 9,
        "budget_tokens": 100000
    })");
    const auto plan = load_plan(dir / "plan.json");
    EXPECT_EQ(plan.context.concepts.size(), 2u);
    EXPECT_EQ(plan.context.materials->front().body, "Routers forward packets.");
    ASSERT_EQ(plan.configs.size(), 2u);
    EXPECT_EQ(plan.configs[0].regime, IterationRegime::dynamic(9));
    EXPECT_EQ(plan.configs[1], cfg("F05/L0/M1"));
    EXPECT_EQ(plan.criteria, (std::vector<Criterion>{Criterion::Clarity, Criterion::OverallQuality}));
    EXPECT_EQ(plan.budget_tokens, 100000);

    const auto again = plan_from_json(plan_to_json(plan), dir);
    EXPECT_EQ(plan_hash(again), plan_hash(plan));
}

TEST(Plan, Defaults) {
    const auto plan = plan_from_json(json{{"topic", "Networks"}, {"concepts", {"router"}}}, ".");
    EXPECT_EQ(plan.configs, canonical_config_grid());
    EXPECT_EQ(plan.questions_per_config, 5);
    EXPECT_EQ(plan.criteria.size(), 4u);
    EXPECT_EQ(plan.backbone_model, "gpt-4o-mini");
    EXPECT_EQ(plan.evaluator_model, "gpt-4");
}

TEST(Plan, Validation) {
    const json base{{"topic", "Networks"}, {"concepts", {"router"}}};
    auto with = [&](const char* key, json value) {
        json j = base;
        j[key] = std::move(value);
        return j;
    };
    EXPECT_THROW(plan_from_json(with("questions_per_config", 0), "."), ValidationError);
    EXPECT_THROW(plan_from_json(with("configs", json::array()), "."), ValidationError);
    EXPECT_THROW(plan_from_json(with("configs", {"DYN/L1/M1", "DYN/L1/M1"}), "."), ValidationError);
    EXPECT_THROW(plan_from_json(with("criteria", {"clarity", "clarity"}), "."), ValidationError);
    EXPECT_THROW(plan_from_json(with("criteria", {"style"}), "."), ValidationError);
    EXPECT_THROW(plan_from_json(with("budget_tokens", 0), "."), ValidationError);
    EXPECT_THROW(plan_from_json(with("parallelism", 0), "."), ValidationError);
    EXPECT_THROW(plan_from_json(with("backbone_model", " "), "."), ValidationError);
    EXPECT_THROW(plan_from_json(with("questions_per_config", "five"), "."), ValidationError);
    EXPECT_THROW(plan_from_json(json{{"topic", "x"}}, "."), ValidationError);
}

TEST(Plan, HashIgnoresLimitsOnly) {
    auto plan = small_plan({cfg("DYN/L1/M1"), cfg("F05/L1/M1")}, 1);
    const auto h = plan_hash(plan);
    plan.budget_tokens = 123;
    plan.parallelism = 8;
    EXPECT_EQ(plan_hash(plan), h);
    plan.master_seed = 18;
    EXPECT_NE(plan_hash(plan), h);
    EXPECT_EQ(run_id("rq1", plan).size(), 4u + 12u);
}

TEST(Rq1, MinimalSweep) {
    const auto dir = fakes::fresh_dir("rq1-min");
    auto plan = small_plan({cfg("DYN/L1/M1"), cfg("F05/L0/M0")}, 1);
    auto agents = fakes::make_agent_backend();
    auto judge = strength_judge({{"DYN/L1/M1", 2}, {"F05/L0/M0", 1}});
    const auto result = run_rq1(plan, *agents, *judge, {dir});

    EXPECT_EQ(result.manifest.at("status"), "complete");
    EXPECT_EQ(result.manifest.at("counts").at("dialogues"), 2);
    EXPECT_EQ(result.manifest.at("counts").at("judgments_total"), 4);
    for (const auto c : kAllCriteria) EXPECT_EQ(result.manifest.at("counts").at("judgments").at(std::string(slug(c))), 1);
    EXPECT_EQ(judge->call_count(), 4);
    EXPECT_EQ(agents->call_count(), 2 + 11);  // DYN approves at round 1; F05 runs 5 rounds
    ASSERT_EQ(result.matrices.size(), 4u);
    EXPECT_EQ(*result.matrices[0].cell(0, 1), Rational(1));
    EXPECT_EQ(*result.matrices[0].cell(1, 0), Rational(0));

    for (const char* f : {"plan.json", "manifest.json", "judgments.jsonl", "traces/dyn_L1M1.json",
                          "traces/fixed5iter_L0M0.json", "matrices/clarity.csv", "matrices/overall_quality.txt",
                          "matrices/depth.json"}) {
        EXPECT_TRUE(fs::exists(result.run_dir / f)) << f;
    }
    const auto trace = json::parse(read_file(result.run_dir / "traces" / "fixed5iter_L0M0.json"));
    EXPECT_FALSE(trace.at("context").contains("level"));
    EXPECT_EQ(trace.at("attempts")[0].at("iterations").size(), 6u);
    EXPECT_EQ(trace.at("attempts")[0].at("seed"),
              derive_seed(17, {"rq1", "dialogue", "F05/L0/M0", "attempt:1"}));
}

TEST(Rq1, DynamicBiasedJudgeGivesOne) {
    const auto dir = fakes::fresh_dir("rq1-dyn");
    auto plan = small_plan({cfg("DYN/L1/M1"), cfg("F05/L1/M1"), cfg("F10/L1/M1"), cfg("DYN/L0/M0")}, 2);
    plan.criteria = {Criterion::OverallQuality};
    auto agents = fakes::make_agent_backend();
    auto judge = fakes::make_judge_backend([](const std::string& q1, const std::string& q2) {
        const bool d1 = q1.rfind("DYN", 0) == 0;
        const bool d2 = q2.rfind("DYN", 0) == 0;
        if (d1 == d2) return 1;
        return d1 ? -2 : 2;
    });
    const auto result = run_rq1(plan, *agents, *judge, {dir});
    const auto& m = result.matrices.at(0);
    for (std::size_t r : {0u, 3u}) {
        for (std::size_t c : {1u, 2u}) {
            EXPECT_EQ(*m.cell(r, c), Rational(1));
            EXPECT_EQ(*m.cell(c, r), Rational(0));
        }
    }
}

TEST(Rq1, CountsAndNoSameConfigPairs) {
    const auto dir = fakes::fresh_dir("rq1-count");
    auto plan = small_plan({cfg("DYN/L1/M1"), cfg("DYN/L1/M0"), cfg("F05/L1/M1"), cfg("F05/L0/M0"), cfg("F10/L1/M1")}, 3);
    plan.criteria = {Criterion::Clarity, Criterion::Depth};
    auto agents = fakes::make_agent_backend();
    auto judge = fakes::make_judge_backend([](const std::string&, const std::string&) { return 1; });
    const auto result = run_rq1(plan, *agents, *judge, {dir});
    const std::size_t expected = 5 * 4 / 2 * 9;
    EXPECT_EQ(result.manifest.at("counts").at("judgments").at("clarity"), expected);
    EXPECT_EQ(result.manifest.at("expected").at("judgments").at("depth"), expected);
    EXPECT_EQ(judge->call_count(), static_cast<std::int64_t>(2 * expected));

    std::set<std::string> seed_paths;
    std::istringstream lines(read_file(result.run_dir / "judgments.jsonl"));
    for (std::string line; std::getline(lines, line);) {
        const auto rec = judge::record_from_json(json::parse(line));
        EXPECT_NE(rec.alpha_config, rec.beta_config);
        EXPECT_EQ(owner_label(rec.judgment.alpha_question_id), rec.alpha_config);
        EXPECT_EQ(owner_label(rec.judgment.beta_question_id), rec.beta_config);
        EXPECT_TRUE(seed_paths.insert(rec.seed_path).second);
    }
    EXPECT_EQ(seed_paths.size(), 2 * expected);
    for (const auto& req : judge->requests()) {
        const auto [q1, q2] = fakes::displayed_questions(req);
        EXPECT_NE(owner_label(fakes::question_owner(q1)), owner_label(fakes::question_owner(q2)));
    }
}

TEST(Rq1, HandComputedFourConfigTable) {
    const auto dir = fakes::fresh_dir("rq1-hand");
    auto plan = small_plan({cfg("DYN/L1/M1"), cfg("DYN/L0/M0"), cfg("F05/L1/M1"), cfg("F10/L0/M0")}, 2);
    plan.criteria = {Criterion::Relevance};
    auto agents = fakes::make_agent_backend();
    auto judge = strength_judge({{"DYN/L1/M1", 3}, {"DYN/L0/M0", 1}, {"F05/L1/M1", 4}, {"F10/L0/M0", 2}});
    const auto result = run_rq1(plan, *agents, *judge, {dir});
    // Per cell: two same-attempt pairs at +-2 and two cross pairs at +-1,
    // so the stronger config scores (4+4+3+3)/16 = 7/8.
    const Rational W(7, 8);
    const Rational L(1, 8);
    const std::optional<Rational> expected[4][4] = {
        {std::nullopt, W, L, W},
        {L, std::nullopt, L, L},
        {W, W, std::nullopt, W},
        {L, W, L, std::nullopt},
    };
    const auto& m = result.matrices.at(0);
    for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(m.cell(r, c), expected[r][c]) << r << "," << c;
    }
    EXPECT_EQ(m.count(0, 1), 4);
    // Default fake educator approves at the first review: no coaching turns.
    EXPECT_EQ(result.manifest.at("counts").at("dynamic_rounds"), (json{{"EducatorApproved", {{"0", 4}}}}));
}

TEST(Rq1, ResumeAfterJudgeOutageIsByteIdentical) {
    auto plan = small_plan({cfg("DYN/L1/M1"), cfg("F05/L1/M0"), cfg("DYN/L0/M1")}, 2);
    const std::map<std::string, int> strength{{"DYN/L1/M1", 3}, {"F05/L1/M0", 1}, {"DYN/L0/M1", 2}};

    const auto clean_dir = fakes::fresh_dir("rq1-clean");
    {
        auto agents = fakes::make_agent_backend();
        auto judge = strength_judge(strength);
        run_rq1(plan, *agents, *judge, {clean_dir});
    }

    const auto dir = fakes::fresh_dir("rq1-crash");
    RunLog log;
    {
        auto agents = fakes::make_agent_backend();
        auto judge = strength_judge(strength);
        FailingAfter flaky(*judge, 20);
        try {
            run_rq1(plan, *agents, flaky, {dir, nullptr, &log});
            FAIL() << "expected ExperimentFailure";
        } catch (const ExperimentFailure& e) {
            EXPECT_EQ(e.code(), "BackendUnavailable");
            EXPECT_NE(e.coordinates().find("judgment rq1/"), std::string::npos);
        }
    }
    const auto run_dir = dir / run_id("rq1", plan);
    const auto partial = json::parse(read_file(run_dir / "manifest.json"));
    EXPECT_EQ(partial.at("status"), "incomplete");
    EXPECT_EQ(partial.at("counts").at("judgments_total"), 20);
    EXPECT_EQ(partial.at("counts").at("dialogues"), 6);

    // Simulate a crash mid-write: a torn final line.
    {
        std::ofstream out(run_dir / "judgments.jsonl", std::ios::app);
        out << R"({"criterion": "clarity", "alpha": "DYN/L1)";
    }

    auto agents = fakes::make_agent_backend();
    auto judge = strength_judge(strength);
    const auto resumed = run_rq1(plan, *agents, *judge, {dir, nullptr, &log});
    EXPECT_TRUE(log.contains("judgment_log_repaired"));
    EXPECT_EQ(agents->call_count(), 0);  // no dialogue re-run
    EXPECT_EQ(judge->call_count(), 4 * 3 * 4 - 20);
    EXPECT_EQ(resumed.manifest.at("status"), "complete");

    const auto clean_run = clean_dir / run_id("rq1", plan);
    EXPECT_EQ(read_tree(run_dir, {"traces", "matrices"}), read_tree(clean_run, {"traces", "matrices"}));
    EXPECT_EQ(render_report(run_dir, analytics::ExportFormat::Csv), render_report(clean_run, analytics::ExportFormat::Csv));
    EXPECT_EQ(fakes::slurp(run_dir / "plan.json"), fakes::slurp(clean_run / "plan.json"));
}

TEST(Rq1, ResumeAfterDialogueFailure) {
    auto plan = small_plan({cfg("DYN/L1/M1"), cfg("F05/L1/M1")}, 2);
    const auto dir = fakes::fresh_dir("rq1-dlg");
    auto agents = fakes::make_agent_backend();
    auto judge = fakes::make_judge_backend([](const std::string&, const std::string&) { return 2; });
    FailingAfter flaky(*agents, 5);
    EXPECT_THROW(run_rq1(plan, flaky, *judge, {dir}), ExperimentFailure);
    EXPECT_EQ(judge->call_count(), 0);
    const auto result = run_rq1(plan, *agents, *judge, {dir});
    EXPECT_EQ(result.manifest.at("counts").at("dialogues"), 4);
}

TEST(Rq1, BudgetStopsThenLargerBudgetCompletes) {
    auto plan = small_plan({cfg("DYN/L1/M1"), cfg("F05/L1/M1")}, 2);
    plan.budget_tokens = 3000;
    const auto dir = fakes::fresh_dir("rq1-budget");
    {
        auto agents = fakes::make_agent_backend();
        auto judge = fakes::make_judge_backend([](const std::string&, const std::string&) { return 1; });
        EXPECT_THROW(run_rq1(plan, *agents, *judge, {dir}), BudgetExceeded);
    }
    const auto run_dir = dir / run_id("rq1", plan);
    const auto manifest = json::parse(read_file(run_dir / "manifest.json"));
    EXPECT_EQ(manifest.at("status"), "incomplete");
    const auto spent = manifest.at("cost").at("cumulative").at("total_tokens").get<std::int64_t>();
    EXPECT_GE(spent, 3000);

    plan.budget_tokens = 1'000'000;
    auto agents = fakes::make_agent_backend();
    auto judge = fakes::make_judge_backend([](const std::string&, const std::string&) { return 1; });
    const auto result = run_rq1(plan, *agents, *judge, {dir});
    EXPECT_EQ(result.run_dir, run_dir);
    EXPECT_EQ(result.manifest.at("status"), "complete");
    EXPECT_GT(result.manifest.at("cost").at("cumulative").at("total_tokens").get<std::int64_t>(), spent);
    EXPECT_EQ(result.manifest.at("cost").at("budget_tokens"), 1'000'000);
    EXPECT_FALSE(agents->cost_ledger());  // scope restored the previous ledger
}

TEST(Rq1, ParallelMatchesSequential) {
    auto plan = small_plan({cfg("DYN/L1/M1"), cfg("F05/L1/M0"), cfg("DYN/L0/M1"), cfg("F10/L0/M0")}, 3);
    const std::map<std::string, int> strength{{"DYN/L1/M1", 3}, {"F05/L1/M0", 1}, {"DYN/L0/M1", 2}, {"F10/L0/M0", 0}};
    std::map<std::string, std::string> trees[2];
    for (int i = 0; i < 2; ++i) {
        plan.parallelism = i == 0 ? 1 : 4;
        const auto dir = fakes::fresh_dir("rq1-par");
        auto agents = fakes::make_agent_backend({[](const fakes::TagInfo& t) { return t.attempt; }});
        auto judge = strength_judge(strength);
        const auto result = run_rq1(plan, *agents, *judge, {dir});
        trees[i] = read_tree(result.run_dir, {"traces", "matrices"});
    }
    EXPECT_EQ(trees[0], trees[1]);
    EXPECT_EQ(trees[0].size(), 4u + 12u);
}

TEST(Rq1, PlanMismatchInRunDirIsRefused) {
    auto plan = small_plan({cfg("DYN/L1/M1"), cfg("F05/L1/M1")}, 1);
    const auto dir = fakes::fresh_dir("rq1-mismatch");
    auto agents = fakes::make_agent_backend();
    auto judge = fakes::make_judge_backend([](const std::string&, const std::string&) { return 1; });
    const auto result = run_rq1(plan, *agents, *judge, {dir});
    auto doc = json::parse(read_file(result.run_dir / "plan.json"));
    doc["plan_hash"] = "deadbeef";
    write_file_atomic(result.run_dir / "plan.json", doc.dump());
    EXPECT_THROW(run_rq1(plan, *agents, *judge, {dir}), StoreError);
}

TEST(Rq1, RequiresTwoConfigs) {
    auto plan = small_plan({cfg("DYN/L1/M1")}, 1);
    auto agents = fakes::make_agent_backend();
    EXPECT_THROW(run_rq1(plan, *agents, *agents, {fakes::fresh_dir("rq1-one")}), ValidationError);
}

TEST(Rq2, PreferringJudgeGivesOne) {
    auto plan = small_plan({cfg("F05/L1/M1")}, 2);  // rq2 ignores the sweep configs
    const auto dir = fakes::fresh_dir("rq2-one");
    auto agents = fakes::make_agent_backend({[](const fakes::TagInfo&) { return 2; }});
    auto judge = fakes::make_judge_backend([](const std::string& q1, const std::string&) {
        return q1.rfind("oneshot", 0) == 0 ? 2 : -2;
    });
    const auto result = run_rq2(plan, *agents, *judge, {dir});
    ASSERT_EQ(result.rows.size(), 4u);
    for (const auto& row : result.rows) {
        for (const auto& g : row.gamma) EXPECT_EQ(g, Rational(1));
    }
    EXPECT_EQ(result.manifest.at("counts").at("one_shot"), 8);
    EXPECT_EQ(result.manifest.at("counts").at("dialogues"), 8);
    EXPECT_EQ(result.manifest.at("counts").at("judgments_total"), 4 * 4 * 4);
    // 4 dynamic dialogues x 2 attempts x 4 calls, plus 8 single calls.
    EXPECT_EQ(agents->call_count(), 4 * 2 * 4 + 8);
    const auto report = read_file(result.run_dir / "report.txt");
    EXPECT_NE(report.find("Relevance: mean 1.00, R-in-R preferred"), std::string::npos);
    EXPECT_TRUE(fs::exists(result.run_dir / "traces" / "oneshot_L0M1.json"));
    EXPECT_TRUE(fs::exists(result.run_dir / "traces" / "dyn_L0M1.json"));

    // Every comparison is condition-matched.
    std::istringstream lines(read_file(result.run_dir / "judgments.jsonl"));
    for (std::string line; std::getline(lines, line);) {
        const auto rec = judge::record_from_json(json::parse(line));
        EXPECT_EQ(rec.alpha_config.substr(4), rec.beta_config.substr(8));
        EXPECT_EQ(rec.beta_config.rfind("oneshot/", 0), 0u);
    }
    EXPECT_EQ(render_report(result.run_dir, analytics::ExportFormat::TextHeatmap), report);
}

TEST(Rq2, AlternatingJudgeGivesHalf) {
    auto plan = small_plan({cfg("DYN/L1/M1"), cfg("F05/L1/M1")}, 2);
    const auto dir = fakes::fresh_dir("rq2-half");
    auto agents = fakes::make_agent_backend();
    // Pair index p = i*k + j from the attempt numbers; alpha wins on even p.
    auto judge = fakes::make_judge_backend([](const std::string& q1, const std::string& q2) {
        const bool alpha_first = q1.rfind("oneshot", 0) != 0;
        const auto& alpha = alpha_first ? q1 : q2;
        const auto& beta = alpha_first ? q2 : q1;
        const int p = (owner_attempt(alpha) - 1) * 2 + (owner_attempt(beta) - 1);
        const bool alpha_wins = p % 2 == 0;
        return alpha_wins == alpha_first ? -1 : 1;
    });
    const auto result = run_rq2(plan, *agents, *judge, {dir});
    for (const auto& row : result.rows) {
        for (const auto& g : row.gamma) EXPECT_EQ(g, Rational(1, 2));
    }
    const auto csv = render_report(result.run_dir, analytics::ExportFormat::Csv);
    EXPECT_NE(csv.find("L0,M0,overall_quality,0.5000"), std::string::npos);
}
