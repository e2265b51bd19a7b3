#include "socratic/domain.hpp"

#include <charconv>
#include <set>

#include "socratic/errors.hpp"
#include "socratic/run_log.hpp"
#include "socratic/text.hpp"

namespace socratic {

// ---------------------------------------------------------------------------
// Context
// ---------------------------------------------------------------------------

std::string_view to_string(MaterialOrigin origin) {
    switch (origin) {
        case MaterialOrigin::TeacherNotes: return "teacher_notes";
        case MaterialOrigin::SlidesText: return "slides_text";
        case MaterialOrigin::Other: return "other";
    }
    return "other";
}

MaterialOrigin material_origin_from_string(std::string_view text) {
    if (text == "teacher_notes") return MaterialOrigin::TeacherNotes;
    if (text == "slides_text") return MaterialOrigin::SlidesText;
    if (text == "other") return MaterialOrigin::Other;
    throw ValidationError("unknown material origin '" + std::string(text) + "'");
}

std::size_t materials_bytes(const GenerationContext& ctx) {
    std::size_t total = 0;
    if (ctx.materials) {
        for (const auto& doc : *ctx.materials) total += doc.body.size();
    }
    return total;
}

void validate(const GenerationContext& ctx, std::size_t materials_byte_budget) {
    if (text::trim(ctx.topic).empty()) {
        throw ValidationError("topic must not be empty");
    }
    if (ctx.concepts.empty()) {
        throw ValidationError("at least one concept is required");
    }
    std::set<std::string> seen;
    for (const auto& concept_text : ctx.concepts) {
        const auto trimmed = text::trim(concept_text);
        if (trimmed.empty()) {
            throw ValidationError("concepts must not be empty");
        }
        if (!seen.insert(text::to_lower_ascii(trimmed)).second) {
            throw ValidationError("duplicate concept '" + std::string(trimmed) + "'");
        }
    }
    if (ctx.student_level && text::trim(*ctx.student_level).empty()) {
        throw ValidationError("student level, when given, must not be blank");
    }
    if (ctx.materials) {
        for (const auto& doc : *ctx.materials) {
            if (text::trim(doc.body).empty()) {
                throw ValidationError("material '" + doc.name + "' has an empty body");
            }
        }
        const std::size_t total = materials_bytes(ctx);
        if (total > materials_byte_budget) {
            throw ValidationError("materials total " + std::to_string(total) +
                                  " bytes, exceeding the budget of " +
                                  std::to_string(materials_byte_budget) + " bytes");
        }
    }
}

// ---------------------------------------------------------------------------
// Configurations
// ---------------------------------------------------------------------------

IterationRegime IterationRegime::dynamic(int cap) {
    if (cap < 1) throw ValidationError("dynamic cap must be >= 1");
    return IterationRegime(RegimeKind::Dynamic, cap);
}

IterationRegime IterationRegime::fixed(int rounds) {
    if (rounds < 1) throw ValidationError("fixed rounds must be >= 1");
    return IterationRegime(RegimeKind::Fixed, rounds);
}

std::string IterationRegime::code() const {
    if (is_dynamic()) return "DYN";
    std::string digits = std::to_string(count_);
    if (digits.size() < 2) digits.insert(0, "0");
    return "F" + digits;
}

IterationRegime IterationRegime::parse(std::string_view code, int dynamic_cap) {
    if (text::iequals(code, "DYN")) return dynamic(dynamic_cap);
    if (code.size() >= 2 && (code[0] == 'F' || code[0] == 'f')) {
        int rounds = 0;
        const auto digits = code.substr(1);
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), rounds);
        if (ec == std::errc() && ptr == digits.data() + digits.size()) return fixed(rounds);
    }
    throw ValidationError("unknown iteration regime '" + std::string(code) + "'");
}

std::string ExperimentConfig::label() const {
    return regime.code() + (level_provided ? "/L1" : "/L0") + (materials_provided ? "/M1" : "/M0");
}

std::string ExperimentConfig::file_stem() const {
    std::string stem = regime.is_dynamic() ? "dyn" : "fixed" + std::to_string(regime.rounds()) + "iter";
    return stem + (level_provided ? "_L1" : "_L0") + (materials_provided ? "M1" : "M0");
}

ExperimentConfig ExperimentConfig::parse_label(std::string_view label, int dynamic_cap) {
    const auto first = label.find('/');
    const auto second = first == std::string_view::npos ? first : label.find('/', first + 1);
    if (second == std::string_view::npos) {
        throw ValidationError("config label must look like DYN/L1/M0, got '" + std::string(label) + "'");
    }
    const auto flag = [&](std::string_view part, char letter) {
        if (part.size() == 2 && part[0] == letter && (part[1] == '0' || part[1] == '1')) {
            return part[1] == '1';
        }
        throw ValidationError("bad flag '" + std::string(part) + "' in config label '" + std::string(label) + "'");
    };
    ExperimentConfig cfg;
    cfg.regime = IterationRegime::parse(label.substr(0, first), dynamic_cap);
    cfg.level_provided = flag(label.substr(first + 1, second - first - 1), 'L');
    cfg.materials_provided = flag(label.substr(second + 1), 'M');
    return cfg;
}

std::vector<ExperimentConfig> canonical_config_grid(int dynamic_cap) {
    const IterationRegime regimes[] = {IterationRegime::dynamic(dynamic_cap), IterationRegime::fixed(5),
                                       IterationRegime::fixed(10)};
    std::vector<ExperimentConfig> grid;
    grid.reserve(12);
    for (const auto& regime : regimes) {
        for (const bool level : {true, false}) {
            for (const bool materials : {true, false}) {
                grid.push_back({regime, level, materials});
            }
        }
    }
    return grid;
}

GenerationContext context_view(const GenerationContext& ctx, const ExperimentConfig& cfg, RunLog* log) {
    GenerationContext view = ctx;
    if (!cfg.level_provided) {
        view.student_level.reset();
    } else if (!ctx.student_level) {
        view.student_level = std::string(kDefaultStudentLevel);
        if (log != nullptr) log->warn("level_defaulted", "level requested but absent, using default (" + cfg.label() + ")");
    }
    if (!cfg.materials_provided) {
        view.materials.reset();
    } else if ((!ctx.materials || ctx.materials->empty()) && log != nullptr) {
        log->warn("materials_absent", "materials requested but absent (" + cfg.label() + ")");
    }
    return view;
}

// ---------------------------------------------------------------------------
// Traces
// ---------------------------------------------------------------------------

std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::EducatorApproved: return "EducatorApproved";
        case Termination::FixedRoundsExhausted: return "FixedRoundsExhausted";
        case Termination::CapReached: return "CapReached";
        case Termination::BackendFailure: return "BackendFailure";
    }
    return "BackendFailure";
}

Termination termination_from_string(std::string_view text) {
    for (auto t : {Termination::EducatorApproved, Termination::FixedRoundsExhausted, Termination::CapReached,
                   Termination::BackendFailure}) {
        if (to_string(t) == text) return t;
    }
    throw ValidationError("unknown termination '" + std::string(text) + "'");
}

std::size_t DialogueTrace::student_turn_count() const {
    std::size_t n = 0;
    for (const auto& turn : turns) n += std::holds_alternative<StudentTurn>(turn) ? 1 : 0;
    return n;
}

std::size_t DialogueTrace::coaching_turn_count() const { return turns.size() - student_turn_count(); }

const StudentTurn& DialogueTrace::last_student_turn() const {
    for (auto it = turns.rbegin(); it != turns.rend(); ++it) {
        if (const auto* s = std::get_if<StudentTurn>(&*it)) return *s;
    }
    throw ValidationError("trace has no student turn");
}

void validate(const DialogueTrace& trace) {
    const auto fail = [](const std::string& what) { throw ValidationError("invalid trace: " + what); };

    if (trace.turns.empty()) fail("no turns");
    const auto* first = std::get_if<StudentTurn>(&trace.turns.front());
    if (first == nullptr || first->iteration_index != 0) fail("first turn must be the initial student turn");
    if (trace.attempt_id < 1) fail("attempt_id must be >= 1");

    for (std::size_t i = 0; i < trace.turns.size(); ++i) {
        const bool expect_student = i % 2 == 0;
        const int expected_index = static_cast<int>((i + 1) / 2);
        if (expect_student) {
            const auto* s = std::get_if<StudentTurn>(&trace.turns[i]);
            if (s == nullptr) fail("turns must alternate student/coaching");
            if (s->iteration_index != expected_index) fail("student turn index out of sequence");
            if (text::trim(s->question).empty() || text::trim(s->rationale).empty()) {
                fail("student turn with empty question or rationale");
            }
        } else {
            const auto* c = std::get_if<CoachingTurn>(&trace.turns[i]);
            if (c == nullptr) fail("turns must alternate student/coaching");
            if (c->iteration_index != expected_index) fail("coaching turn index out of sequence");
            if (text::trim(c->feedback_question).empty()) fail("empty coaching question");
        }
    }

    if (trace.final_question != trace.last_student_turn().question) {
        fail("final_question differs from the last student question");
    }

    const auto coaching = static_cast<int>(trace.coaching_turn_count());
    const auto students = static_cast<int>(trace.student_turn_count());
    if (trace.termination == Termination::BackendFailure) return;  // partial trace

    if (trace.config.regime.is_dynamic()) {
        if (coaching > trace.config.regime.cap()) fail("coaching rounds exceed the dynamic cap");
        if (trace.termination == Termination::FixedRoundsExhausted) fail("dynamic run cannot exhaust fixed rounds");
        if (trace.termination == Termination::CapReached && coaching != trace.config.regime.cap()) {
            fail("CapReached before the cap");
        }
        if (trace.termination == Termination::EducatorApproved && !trace.approval_reply) {
            fail("approved trace without an approval reply");
        }
    } else {
        const int n = trace.config.regime.rounds();
        if (trace.termination != Termination::FixedRoundsExhausted) fail("fixed run must exhaust its rounds");
        if (coaching != n || students != n + 1) fail("fixed run has the wrong number of turns");
    }
    if (students != coaching + 1) fail("every coaching turn must be followed by a revision");
}

// ---------------------------------------------------------------------------
// Evaluation vocabulary
// ---------------------------------------------------------------------------

std::string_view guiding_question(Criterion c) {
    switch (c) {
        case Criterion::Clarity:
            return "Is the question clearly stated and easy to understand?";
        case Criterion::Relevance:
            return "Is the question aligned with the target topic and key concepts?";
        case Criterion::Depth:
            return "Does the question encourage critical thinking and non-trivial reflection rather than "
                   "simple factual or yes/no responses?";
        case Criterion::OverallQuality:
            return "Taking structure, engagement, and pedagogical usefulness together, how good is the "
                   "question overall?";
    }
    return "";
}

std::string_view display_name(Criterion c) {
    switch (c) {
        case Criterion::Clarity: return "Clarity";
        case Criterion::Relevance: return "Relevance";
        case Criterion::Depth: return "Depth";
        case Criterion::OverallQuality: return "Overall Quality";
    }
    return "";
}

std::string_view slug(Criterion c) {
    switch (c) {
        case Criterion::Clarity: return "clarity";
        case Criterion::Relevance: return "relevance";
        case Criterion::Depth: return "depth";
        case Criterion::OverallQuality: return "overall_quality";
    }
    return "";
}

Criterion criterion_from_string(std::string_view text) {
    for (auto c : kAllCriteria) {
        if (text::iequals(text, slug(c)) || text::iequals(text, display_name(c))) return c;
    }
    throw ValidationError("unknown criterion '" + std::string(text) + "'");
}

std::string_view to_string(Position p) { return p == Position::Question1 ? "Question1" : "Question2"; }

Position position_from_string(std::string_view text) {
    if (text == "Question1") return Position::Question1;
    if (text == "Question2") return Position::Question2;
    throw ValidationError("unknown position '" + std::string(text) + "'");
}

}  // namespace socratic
