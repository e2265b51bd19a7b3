#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "socratic/agents.hpp"
#include "socratic/analytics.hpp"
#include "socratic/domain.hpp"
#include "socratic/errors.hpp"
#include "socratic/llm.hpp"

namespace socratic {

class RunLog;

namespace experiment {

/// SHA-256 over the little-endian master seed and the length-prefixed
/// labels, truncated to the first 8 bytes (little-endian).
std::uint64_t derive_seed(std::uint64_t master_seed, const std::vector<std::string>& path);

struct ExperimentPlan {
    GenerationContext context;
    std::vector<ExperimentConfig> configs = canonical_config_grid();
    int questions_per_config = 5;
    std::vector<Criterion> criteria{kAllCriteria.begin(), kAllCriteria.end()};
    std::uint64_t master_seed = 0;
    std::string backbone_model = "gpt-4o-mini";
    std::string evaluator_model = "gpt-4";
    std::optional<std::int64_t> budget_tokens;
    int parallelism = 1;
    int dynamic_cap = kDefaultDynamicCap;
};

void validate(const ExperimentPlan& plan);

/// Parses a plan document. Concepts and materials may be referenced by
/// path relative to `base_dir`.
ExperimentPlan plan_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
ExperimentPlan load_plan(const std::filesystem::path& path);

/// Resolved form with material bodies inlined; stored as plan.json.
nlohmann::json plan_to_json(const ExperimentPlan& plan);

/// Hex SHA-256 of the fields that determine outputs. Budget and parallelism
/// are excluded so a run can be resumed under different limits.
std::string plan_hash(const ExperimentPlan& plan);

/// A component failure annotated with where in the run it happened. `code()`
/// is the code of the underlying error.
class ExperimentFailure : public Error {
public:
    ExperimentFailure(std::string coordinates, const Error& cause)
        : Error(cause.code(), coordinates + ": " + cause.what()), coordinates_(std::move(coordinates)) {}

    const std::string& coordinates() const noexcept { return coordinates_; }

private:
    std::string coordinates_;
};

struct RunnerOptions {
    std::filesystem::path runs_dir = "runs";
    const agents::TemplateSet* templates = nullptr;
    RunLog* log = nullptr;
    int max_tries = 3;
};

struct GeneratedQuestion {
    std::string id;  // "DYN/L1/M1#2"
    std::string text;
    std::string trace_ref;  // "traces/dyn_L1M1.json#attempt2"
};

struct QuestionSet {
    std::string label;
    std::vector<GeneratedQuestion> questions;
};

struct RunOutcome {
    std::string run_id;
    std::filesystem::path run_dir;
    nlohmann::json manifest;
    std::vector<QuestionSet> question_sets;
};

struct Rq1Result : RunOutcome {
    std::vector<analytics::PreferenceMatrix> matrices;  // one per plan criterion
};

struct Rq2Result : RunOutcome {
    std::vector<analytics::Rq2Row> rows;
};

/// Runs the configuration sweep under `runs_dir/rq1-<hash>/`. Finished
/// dialogues and judgments found there are reused.
Rq1Result run_rq1(const ExperimentPlan& plan, llm::ChatBackend& agents_backend, llm::ChatBackend& judge_backend,
                  const RunnerOptions& options = {});

/// Compares dynamic dialogues with the one-shot baseline under each of the
/// four level/materials conditions, in `runs_dir/rq2-<hash>/`.
Rq2Result run_rq2(const ExperimentPlan& plan, llm::ChatBackend& agents_backend, llm::ChatBackend& judge_backend,
                  const RunnerOptions& options = {});

std::string run_id(std::string_view experiment, const ExperimentPlan& plan);

/// Rebuilds the matrices of a finished rq1 run from its judgment log.
std::vector<analytics::PreferenceMatrix> load_rq1_matrices(const std::filesystem::path& run_dir);
/// Rebuilds the rows of a finished rq2 run from its judgment log.
std::vector<analytics::Rq2Row> load_rq2_rows(const std::filesystem::path& run_dir);

/// Renders every matrix (rq1) or the baseline report (rq2) of a run.
std::string render_report(const std::filesystem::path& run_dir, analytics::ExportFormat format);

}  // namespace experiment
}  // namespace socratic
