#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "socratic/rational.hpp"

namespace socratic {

class RunLog;

inline constexpr std::size_t kDefaultMaterialsByteBudget = 100'000;
inline constexpr int kDefaultDynamicCap = 15;
/// Used when a config provides the level but the context has none.
inline constexpr std::string_view kDefaultStudentLevel = "8th-9th grade students (approximately ages 13-15)";

// ---------------------------------------------------------------------------
// Generation context
// ---------------------------------------------------------------------------

enum class MaterialOrigin { TeacherNotes, SlidesText, Other };

std::string_view to_string(MaterialOrigin origin);
MaterialOrigin material_origin_from_string(std::string_view text);

struct MaterialDocument {
    std::string name;
    std::string body;  // pre-extracted plain text or markdown
    MaterialOrigin origin = MaterialOrigin::Other;

    bool operator==(const MaterialDocument&) const = default;
};

/// The teacher's inputs for one generation: topic, concepts, optional
/// student level and optional materials. `constraints` and `prior_question`
/// carry follow-up instructions from an interactive session; they are an
/// extra instruction block and never rewrite the topic or concepts.
struct GenerationContext {
    std::string topic;
    std::vector<std::string> concepts;
    std::optional<std::string> student_level;
    std::optional<std::vector<MaterialDocument>> materials;
    std::vector<std::string> constraints;
    std::optional<std::string> prior_question;

    bool operator==(const GenerationContext&) const = default;
};

/// Combined byte size of all material bodies.
std::size_t materials_bytes(const GenerationContext& ctx);

/// Throws ValidationError describing the first violated invariant.
void validate(const GenerationContext& ctx,
              std::size_t materials_byte_budget = kDefaultMaterialsByteBudget);

// ---------------------------------------------------------------------------
// Configurations
// ---------------------------------------------------------------------------

enum class RegimeKind { Dynamic, Fixed };

class IterationRegime {
public:
    static IterationRegime dynamic(int cap = kDefaultDynamicCap);
    static IterationRegime fixed(int rounds);

    RegimeKind kind() const noexcept { return kind_; }
    bool is_dynamic() const noexcept { return kind_ == RegimeKind::Dynamic; }
    /// Fixed rounds; only meaningful for Fixed.
    int rounds() const noexcept { return count_; }
    /// Safety cap on coaching rounds; only meaningful for Dynamic.
    int cap() const noexcept { return count_; }

    /// "DYN", "F05", "F10", ...
    std::string code() const;
    /// Inverse of code(); "DYN" takes `dynamic_cap`.
    static IterationRegime parse(std::string_view code, int dynamic_cap = kDefaultDynamicCap);

    bool operator==(const IterationRegime&) const = default;

private:
    IterationRegime(RegimeKind kind, int count) : kind_(kind), count_(count) {}

    RegimeKind kind_ = RegimeKind::Dynamic;
    int count_ = kDefaultDynamicCap;
};

struct ExperimentConfig {
    IterationRegime regime = IterationRegime::dynamic();
    bool level_provided = true;
    bool materials_provided = true;

    /// "DYN/L1/M0" style label used in exports and identifiers.
    std::string label() const;
    /// "dyn_L1M0", "fixed5iter_L0M1", ... used for trace file names.
    std::string file_stem() const;

    static ExperimentConfig parse_label(std::string_view label, int dynamic_cap = kDefaultDynamicCap);

    bool operator==(const ExperimentConfig&) const = default;
};

/// The 12-cell ablation grid in heatmap row order: DYN, F05, F10 outer,
/// then (L,M) = (1,1), (1,0), (0,1), (0,0).
std::vector<ExperimentConfig> canonical_config_grid(int dynamic_cap = kDefaultDynamicCap);

/// Copy of `ctx` with the level and/or materials dropped when `cfg` withholds
/// them. Requesting a field the context does not carry is logged, not fatal.
GenerationContext context_view(const GenerationContext& ctx, const ExperimentConfig& cfg,
                               RunLog* log = nullptr);

// ---------------------------------------------------------------------------
// Dialogue traces
// ---------------------------------------------------------------------------

struct StudentTurn {
    std::string question;
    std::string rationale;
    int iteration_index = 0;
    std::string raw_reply;
    /// Replies discarded by re-prompting before `raw_reply` was accepted.
    std::vector<std::string> rejected_replies;

    bool operator==(const StudentTurn&) const = default;
};

struct CoachingTurn {
    std::string feedback_question;
    int iteration_index = 1;
    std::string raw_reply;
    std::vector<std::string> rejected_replies;

    bool operator==(const CoachingTurn&) const = default;
};

using DialogueTurn = std::variant<StudentTurn, CoachingTurn>;

enum class Termination { EducatorApproved, FixedRoundsExhausted, CapReached, BackendFailure };

std::string_view to_string(Termination t);
Termination termination_from_string(std::string_view text);

struct DialogueTrace {
    ExperimentConfig config;
    GenerationContext context;
    std::vector<DialogueTurn> turns;
    std::string final_question;
    Termination termination = Termination::FixedRoundsExhausted;
    /// Verbatim approval reply when the educator terminated the dialogue,
    /// plus any replies that were re-prompted away before it.
    std::optional<std::string> approval_reply;
    std::vector<std::string> approval_rejected_replies;
    int attempt_id = 1;
    std::uint64_t seed = 0;

    std::size_t student_turn_count() const;
    std::size_t coaching_turn_count() const;
    const StudentTurn& last_student_turn() const;

    bool operator==(const DialogueTrace&) const = default;
};

/// Throws ValidationError naming the violated trace invariant.
void validate(const DialogueTrace& trace);

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

enum class Criterion { Clarity, Relevance, Depth, OverallQuality };

inline constexpr std::array<Criterion, 4> kAllCriteria{
    Criterion::Clarity, Criterion::Relevance, Criterion::Depth, Criterion::OverallQuality};

/// Guidance shown to the evaluator for this criterion.
std::string_view guiding_question(Criterion c);
/// "Clarity", "Relevance", "Depth", "Overall Quality".
std::string_view display_name(Criterion c);
/// "clarity", "relevance", "depth", "overall_quality".
std::string_view slug(Criterion c);
Criterion criterion_from_string(std::string_view text);

enum class Position { Question1, Question2 };

std::string_view to_string(Position p);
Position position_from_string(std::string_view text);

struct Judgment {
    Criterion criterion = Criterion::Clarity;
    std::string alpha_question_id;
    std::string beta_question_id;
    Position alpha_position = Position::Question1;
    int d_raw = 1;
    int d_oriented = 1;
    Rational unit_score;
    std::string justification;
    std::string evaluator_model;

    bool operator==(const Judgment&) const = default;
};

}  // namespace socratic
