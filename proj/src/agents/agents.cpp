#include "socratic/agents.hpp"

#include <cctype>

#include "socratic/errors.hpp"
#include "socratic/run_log.hpp"
#include "socratic/text.hpp"

namespace socratic::agents {

std::string_view to_string(PromptRole role) {
    switch (role) {
        case PromptRole::StudentInitial: return "student_initial";
        case PromptRole::StudentRevision: return "student_revision";
        case PromptRole::Educator: return "educator";
        case PromptRole::Judge: return "judge";
    }
    return "";
}

llm::ChatRequest PromptBundle::to_request(const AgentSettings& settings, std::string request_tag) const {
    llm::ChatRequest req;
    req.model = settings.model;
    req.temperature = settings.temperature;
    req.max_output_tokens = settings.max_output_tokens;
    req.request_tag = std::move(request_tag);
    req.messages.push_back({llm::Role::System, system});
    for (const auto& turn : user_turns) req.messages.push_back({llm::Role::User, turn});
    return req;
}

std::string PromptBundle::full_text() const {
    std::string out = system;
    for (const auto& turn : user_turns) out += "\n\n" + turn;
    return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string bullet_list(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& item : items) {
        if (!out.empty()) out += '\n';
        out += "- " + item;
    }
    return out;
}

std::string materials_block(const std::vector<MaterialDocument>& docs) {
    std::string out;
    for (const auto& doc : docs) {
        if (!out.empty()) out += "\n\n";
        out += "### " + (doc.name.empty() ? std::string("Document") : doc.name) + " (" +
               std::string(to_string(doc.origin)) + ")\n\n" + doc.body;
    }
    return out;
}

PromptTemplate::Values context_values(const GenerationContext& ctx) {
    PromptTemplate::Values values;
    values["topic"] = ctx.topic;
    values["concepts"] = bullet_list(ctx.concepts);
    values["level"] = ctx.student_level;
    if (ctx.materials && !ctx.materials->empty()) values["materials"] = materials_block(*ctx.materials);
    if (!ctx.constraints.empty()) values["constraints"] = bullet_list(ctx.constraints);
    values["prior_question"] = ctx.prior_question;
    return values;
}

PromptBundle make_bundle(PromptRole role, const TemplateSet& templates, const PromptTemplate::Values& values) {
    auto rendered = templates.get(role).render(values);
    return PromptBundle{role, std::move(rendered.system), std::move(rendered.user_turns)};
}

}  // namespace

PromptBundle render_student_initial(const GenerationContext& ctx, const TemplateSet& templates) {
    return make_bundle(PromptRole::StudentInitial, templates, context_values(ctx));
}

PromptBundle render_student_revision(const GenerationContext& ctx, const StudentTurn& previous,
                                     const CoachingTurn& feedback, const TemplateSet& templates) {
    if (feedback.iteration_index != previous.iteration_index + 1) {
        throw ValidationError("feedback does not follow the previous student turn");
    }
    auto values = context_values(ctx);
    values["question"] = previous.question;
    values["rationale"] = previous.rationale;
    values["feedback"] = feedback.feedback_question;
    return make_bundle(PromptRole::StudentRevision, templates, values);
}

PromptBundle render_educator(const GenerationContext& ctx, const StudentTurn& current, const TemplateSet& templates) {
    auto values = context_values(ctx);
    values["question"] = current.question;
    values["rationale"] = current.rationale;
    return make_bundle(PromptRole::Educator, templates, values);
}

PromptBundle render_judge(std::string_view question_1, std::string_view question_2, Criterion criterion,
                          std::string_view topic, const std::vector<std::string>& concepts,
                          const TemplateSet& templates) {
    PromptTemplate::Values values;
    values["topic"] = std::string(topic);
    values["concepts"] = bullet_list(concepts);
    values["question_1"] = std::string(question_1);
    values["question_2"] = std::string(question_2);
    values["criterion_guidance"] = std::string(display_name(criterion)) + ". " + std::string(guiding_question(criterion));
    return make_bundle(PromptRole::Judge, templates, values);
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

/// Splits on blank lines; paragraphs keep their internal newlines.
std::vector<std::string_view> paragraphs(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t para_start = std::string_view::npos;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto eol = s.find('\n', pos);
        const auto end = eol == std::string_view::npos ? s.size() : eol;
        const bool blank = text::trim(s.substr(pos, end - pos)).empty();
        if (!blank && para_start == std::string_view::npos) para_start = pos;
        if (blank && para_start != std::string_view::npos) {
            out.push_back(text::trim(s.substr(para_start, pos - para_start)));
            para_start = std::string_view::npos;
        }
        if (eol == std::string_view::npos) break;
        pos = eol + 1;
    }
    if (para_start != std::string_view::npos) out.push_back(text::trim(s.substr(para_start)));
    return out;
}

std::string_view strip_label(std::string_view s, std::initializer_list<std::string_view> labels) {
    for (auto label : labels) {
        bool stripped = false;
        auto rest = text::strip_prefix_ci(s, label, &stripped);
        if (stripped) return text::trim(rest);
    }
    return s;
}

std::string_view strip_question_label(std::string_view s) {
    return strip_label(s, {"**Revised question:**", "**Reflection question:**", "**Question:**", "Revised question:",
                           "Reflection question:", "Question:"});
}

std::string_view strip_rationale_label(std::string_view s) {
    return strip_label(s, {"**Rationale:**", "**Explanation:**", "Rationale:", "Explanation:"});
}

/// End offset (exclusive) of the first '?' that closes a sentence.
std::size_t first_question_end(std::string_view s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '?') continue;
        std::size_t j = i + 1;
        while (j < s.size() && (s[j] == '?' || s[j] == '"' || s[j] == '\'' || s[j] == ')')) ++j;
        if (j == s.size() || std::isspace(static_cast<unsigned char>(s[j])) != 0) return j;
    }
    return std::string_view::npos;
}

}  // namespace

StudentTurn parse_student_reply(std::string_view raw, int iteration_index, RunLog* log) {
    const std::string_view body = text::trim(text::strip_prefix_ci(raw, kStudentPrefix));
    if (body.find('?') == std::string_view::npos) {
        throw UnparsableReply("student reply contains no question");
    }

    const auto paras = paragraphs(body);
    std::size_t q_index = 0;
    while (q_index < paras.size() && paras[q_index].find('?') == std::string_view::npos) ++q_index;

    std::string question;
    std::string rationale;
    if (q_index + 1 < paras.size()) {
        question = std::string(strip_question_label(paras[q_index]));
        std::vector<std::string> rest(paras.begin() + static_cast<std::ptrdiff_t>(q_index) + 1, paras.end());
        rationale = text::join(rest, "\n\n");
    } else {
        const std::string_view para = strip_question_label(paras[q_index]);
        const auto cut = first_question_end(para);
        if (cut == std::string_view::npos) throw UnparsableReply("student reply contains no complete question");
        question = std::string(text::trim(para.substr(0, cut)));
        rationale = std::string(text::trim(para.substr(cut)));
    }
    rationale = std::string(strip_rationale_label(rationale));

    if (text::trim(question).empty()) throw UnparsableReply("student reply has an empty question");
    if (text::trim(rationale).empty()) throw UnparsableReply("student reply has no rationale");

    const int sentences = text::count_sentences(rationale);
    if (sentences > kMaxRationaleSentences && log != nullptr) {
        log->warn("rationale_too_long", "iteration " + std::to_string(iteration_index) + " rationale has " +
                                            std::to_string(sentences) + " sentences");
    }
    return StudentTurn{std::move(question), std::move(rationale), iteration_index, std::string(raw), {}};
}

namespace {

std::string normalize_for_approval(std::string_view s) {
    s = text::trim(s);
    const auto is_trim_char = [](char c) {
        return std::isspace(static_cast<unsigned char>(c)) != 0 || c == '"' || c == '\'' || c == '*' || c == '`';
    };
    while (!s.empty() && is_trim_char(s.front())) s.remove_prefix(1);
    while (!s.empty() && (is_trim_char(s.back()) || std::ispunct(static_cast<unsigned char>(s.back())) != 0)) {
        s.remove_suffix(1);
    }
    std::string out;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c)) != 0) {
            if (!out.empty() && out.back() != ' ') out.push_back(' ');
        } else {
            out.push_back(c);
        }
    }
    return text::to_lower_ascii(out);
}

}  // namespace

bool is_approval(std::string_view raw) {
    const auto remainder = text::strip_prefix_ci(text::trim(raw), kTeacherPrefix);
    return normalize_for_approval(remainder) == "great question";
}

CoachingOutcome parse_educator_reply(std::string_view raw, int iteration_index) {
    if (is_approval(raw)) return Approve{};
    const auto remainder = text::trim(text::strip_prefix_ci(text::trim(raw), kTeacherPrefix));
    if (remainder.empty()) throw EmptyFeedback("educator reply is empty after the feedback prefix");
    return CoachingTurn{std::string(remainder), iteration_index, std::string(raw), {}};
}

}  // namespace socratic::agents
