#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "socratic/agents.hpp"
#include "socratic/domain.hpp"
#include "socratic/llm.hpp"
#include "socratic/rational.hpp"

namespace socratic::judge {

struct PairAssignment {
    std::string alpha_question_id;
    std::string beta_question_id;
    Position alpha_position = Position::Question1;
    std::uint64_t rng_draw = 0;  // only the low bit decides the position
};

/// Low bit 0 puts alpha in Question1, 1 in Question2.
PairAssignment assign_positions(std::string alpha_qid, std::string beta_qid, std::uint64_t draw);
PairAssignment assign_positions(std::string alpha_qid, std::string beta_qid, std::mt19937_64& rng);

/// Re-signs a raw score so that positive values favour alpha.
int orient(int d_raw, Position alpha_position);

/// (2 + d)/4 as an exact fraction.
Rational unit_score(int d_oriented);

bool is_valid_score(int d) noexcept;

struct RawScore {
    int d_raw = 0;
    std::string justification;
    /// Replies rejected before the accepted one.
    std::vector<std::string> rejected_replies;
};

/// Parses `{"score": d, "justification": "..."}` out of a reply that may wrap
/// the object in prose or a code fence. Throws JudgeProtocolError.
RawScore parse_judge_reply(std::string_view raw);

struct JudgeOptions {
    agents::AgentSettings evaluator{"gpt-4", 0.0, 512};
    int max_tries = 3;
    const agents::TemplateSet* templates = nullptr;
    std::string tag_prefix = "judge";
};

struct QuestionRef {
    std::string id;
    std::string text;
};

/// Asks the evaluator for a difference score, re-prompting malformed or tied
/// replies up to `max_tries` total calls.
RawScore elicit_raw_score(const PairAssignment& assignment, std::string_view alpha_text, std::string_view beta_text,
                          Criterion criterion, std::string_view topic, const std::vector<std::string>& concepts,
                          llm::ChatBackend& backend, const JudgeOptions& options = {});

/// assign -> elicit -> orient -> unit score.
Judgment judge_pair(const QuestionRef& alpha, const QuestionRef& beta, Criterion criterion,
                    std::string_view topic, const std::vector<std::string>& concepts, llm::ChatBackend& backend,
                    std::mt19937_64& rng, const JudgeOptions& options = {});

/// Throws ValidationError unless the stored fields obey orient/unit_score.
void validate(const Judgment& j);

/// One line of the judgments log.
struct JudgmentRecord {
    Judgment judgment;
    std::string alpha_config;  // config label
    std::string beta_config;
    std::string seed_path;
    std::int64_t timestamp_ms = 0;
};

nlohmann::json to_json(const JudgmentRecord& record);
JudgmentRecord record_from_json(const nlohmann::json& j);

}  // namespace socratic::judge
