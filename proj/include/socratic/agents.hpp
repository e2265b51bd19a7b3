#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "socratic/domain.hpp"
#include "socratic/llm.hpp"

namespace socratic {

class RunLog;

namespace agents {

inline constexpr std::string_view kStudentPrefix = "The Student's response:";
inline constexpr std::string_view kTeacherPrefix = "The Teacher's feedback:";
inline constexpr std::string_view kApprovalPhrase = "Great question!";
inline constexpr int kMaxRationaleSentences = 5;

enum class PromptRole { StudentInitial, StudentRevision, Educator, Judge };

std::string_view to_string(PromptRole role);

/// Decoding parameters for one agent role.
struct AgentSettings {
    std::string model = "gpt-4o-mini";
    double temperature = 0.7;
    int max_output_tokens = 1024;
};

struct PromptBundle {
    PromptRole role = PromptRole::StudentInitial;
    std::string system;
    std::vector<std::string> user_turns;

    /// System message followed by one user message per turn.
    llm::ChatRequest to_request(const AgentSettings& settings, std::string request_tag) const;
    /// All prompt text concatenated; handy for containment checks.
    std::string full_text() const;

    bool operator==(const PromptBundle&) const = default;
};

/// A prompt template: `=== system ===` and `=== user ===` section headers,
/// `{{name}}` placeholders and `{{#name}}...{{/name}}` / `{{^name}}...{{/name}}`
/// blocks rendered when the value is present / absent. Each user section is
/// one user turn; turns that render empty are dropped.
class PromptTemplate {
public:
    /// Throws TemplateError on unknown placeholders, unbalanced blocks, a
    /// missing system section, or `{{materials}}` outside the first user turn.
    static PromptTemplate parse(std::string_view source, PromptRole role);

    using Values = std::map<std::string, std::optional<std::string>, std::less<>>;

    struct Rendered {
        std::string system;
        std::vector<std::string> user_turns;
    };

    Rendered render(const Values& values) const;

    struct Node;
    using Nodes = std::vector<Node>;

private:
    Nodes system_;
    std::vector<Nodes> user_;
};

struct PromptTemplate::Node {
    enum class Kind { Text, Value, Block, InvertedBlock };
    Kind kind = Kind::Text;
    std::string text;  // literal text or placeholder name
    Nodes children;
};

/// The placeholder names a template for `role` may use.
const std::vector<std::string>& allowed_placeholders(PromptRole role);

class TemplateSet {
public:
    static TemplateSet defaults();
    /// Loads `student_initial.tmpl`, `student_revision.tmpl`, `educator.tmpl`
    /// and `judge.tmpl` from `dir`; missing files fall back to the defaults.
    static TemplateSet load_dir(const std::filesystem::path& dir);

    static std::string_view default_source(PromptRole role);
    static std::string_view file_name(PromptRole role);

    const PromptTemplate& get(PromptRole role) const;

private:
    std::map<PromptRole, PromptTemplate> templates_;
};

const TemplateSet& default_templates();

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

PromptBundle render_student_initial(const GenerationContext& ctx, const TemplateSet& templates = default_templates());

PromptBundle render_student_revision(const GenerationContext& ctx, const StudentTurn& previous,
                                     const CoachingTurn& feedback,
                                     const TemplateSet& templates = default_templates());

PromptBundle render_educator(const GenerationContext& ctx, const StudentTurn& current,
                             const TemplateSet& templates = default_templates());

PromptBundle render_judge(std::string_view question_1, std::string_view question_2, Criterion criterion,
                          std::string_view topic, const std::vector<std::string>& concepts,
                          const TemplateSet& templates = default_templates());

/// Follow-up instructions appended after a rejected reply.
std::string_view student_reprompt_note();
std::string_view educator_reprompt_note();
std::string_view no_approval_note();
std::string_view judge_reprompt_note();

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

/// Splits a Student-Teacher reply into question and rationale. Throws
/// UnparsableReply when no question mark is present or nothing is left for
/// the rationale. A rationale over five sentences is logged, not rejected.
StudentTurn parse_student_reply(std::string_view raw, int iteration_index, RunLog* log = nullptr);

struct Approve {
    bool operator==(const Approve&) const = default;
};

using CoachingOutcome = std::variant<CoachingTurn, Approve>;

/// Approve iff the reply, minus the optional feedback prefix, equals the
/// approval phrase up to case, whitespace and trailing punctuation.
/// Throws EmptyFeedback when nothing remains after the prefix.
CoachingOutcome parse_educator_reply(std::string_view raw, int iteration_index = 1);

bool is_approval(std::string_view raw);

}  // namespace agents
}  // namespace socratic
