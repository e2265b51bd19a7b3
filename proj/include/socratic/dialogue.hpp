#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "socratic/agents.hpp"
#include "socratic/domain.hpp"
#include "socratic/errors.hpp"
#include "socratic/llm.hpp"

namespace socratic {

class RunLog;

namespace dialogue {

/// Raised when the backend fails mid-dialogue. Carries every turn gathered
/// before the failure (termination = BackendFailure) when at least the
/// initial question was obtained.
class BackendFailure : public Error {
public:
    BackendFailure(const std::string& message, std::string cause_code, std::optional<DialogueTrace> partial)
        : Error("BackendFailure", message), cause_code_(std::move(cause_code)), partial_(std::move(partial)) {}

    const std::string& cause_code() const noexcept { return cause_code_; }
    const std::optional<DialogueTrace>& partial_trace() const noexcept { return partial_; }

private:
    std::string cause_code_;
    std::optional<DialogueTrace> partial_;
};

struct EngineOptions {
    agents::AgentSettings student;
    agents::AgentSettings educator;
    /// Total tries per agent call, counting the first; exhausted tries raise
    /// UnparsableReply.
    int max_tries = 3;
    const agents::TemplateSet* templates = nullptr;  // defaults when null
    RunLog* log = nullptr;
    std::string tag_prefix = "dialogue";
};

/// Runs the generate / coach / revise loop for one attempt.
///
/// Dynamic regimes stop on the first educator approval (q* is the question
/// that was approved) or after `cap` coaching rounds. Fixed regimes always
/// run exactly `rounds` coaching rounds; an approval is refused with a
/// re-prompt. Each agent call is rendered from the trace so far, so the
/// function is deterministic for a deterministic backend.
DialogueTrace run_dialogue(const GenerationContext& ctx, const ExperimentConfig& cfg, llm::ChatBackend& backend,
                           std::uint64_t seed, int attempt_id, const EngineOptions& options = {});

/// Single student-initial call on the ablated context; the one-shot
/// baseline. `cfg` only contributes its level/materials flags.
StudentTurn one_shot_generate(const GenerationContext& ctx, const ExperimentConfig& cfg, llm::ChatBackend& backend,
                              const EngineOptions& options = {});

/// Every raw reply the engine consumed for `trace`, in call order,
/// including re-prompted rejects. Feeding these to a ScriptedBackend
/// reproduces the trace.
std::vector<std::string> replay_script(const DialogueTrace& trace);

}  // namespace dialogue
}  // namespace socratic
