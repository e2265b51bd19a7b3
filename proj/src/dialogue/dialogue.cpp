#include "socratic/dialogue.hpp"

#include "socratic/run_log.hpp"
#include "socratic/text.hpp"

namespace socratic::dialogue {

namespace {

/// Thrown by a reply parser to request a re-prompt with `note`.
struct Rejected {
    std::string reason;
    std::string_view note;
};

template <typename T>
struct Accepted {
    T value;
    std::string raw;
    std::vector<std::string> rejected;
};

class Session {
public:
    Session(llm::ChatBackend& backend, const EngineOptions& options, std::string tag_base)
        : backend_(backend), options_(options), tag_base_(std::move(tag_base)) {}

    /// Calls the backend until `parse` accepts a reply or tries run out.
    template <typename Parse>
    auto call(const agents::PromptBundle& bundle, const agents::AgentSettings& settings, const std::string& tag,
              Parse parse) -> Accepted<decltype(parse(std::string_view{}))> {
        auto req = bundle.to_request(settings, tag_base_ + "/" + tag);
        std::vector<std::string> rejected;
        std::string last_reason;
        for (int attempt = 1; attempt <= options_.max_tries; ++attempt) {
            if (attempt > 1) req.request_tag = tag_base_ + "/" + tag + "#retry" + std::to_string(attempt - 1);
            std::string raw;
            try {
                raw = backend_.complete(req).content;
            } catch (const ResponseEmpty&) {
                raw.clear();
            }
            try {
                if (text::trim(raw).empty()) throw Rejected{"blank reply", {}};
                return {parse(raw), raw, std::move(rejected)};
            } catch (const Rejected& r) {
                last_reason = r.reason;
                if (options_.log != nullptr) {
                    options_.log->warn("reprompt", tag_base_ + "/" + tag + ": " + r.reason);
                }
                if (!text::trim(raw).empty()) req.messages.push_back({llm::Role::Assistant, raw});
                req.messages.push_back({llm::Role::User, std::string(r.note.empty() ? default_note_ : r.note)});
                rejected.push_back(std::move(raw));
            }
        }
        throw UnparsableReply(tag_base_ + "/" + tag + ": no usable reply after " + std::to_string(options_.max_tries) +
                              " tries (" + last_reason + ")");
    }

    void set_default_note(std::string_view note) { default_note_ = note; }

private:
    llm::ChatBackend& backend_;
    const EngineOptions& options_;
    std::string tag_base_;
    std::string_view default_note_;
};

const agents::TemplateSet& templates_of(const EngineOptions& options) {
    return options.templates != nullptr ? *options.templates : agents::default_templates();
}

StudentTurn parse_student_or_reject(std::string_view raw, int index, RunLog* log) {
    try {
        return agents::parse_student_reply(raw, index, log);
    } catch (const UnparsableReply& e) {
        throw Rejected{e.what(), agents::student_reprompt_note()};
    }
}

}  // namespace

DialogueTrace run_dialogue(const GenerationContext& ctx, const ExperimentConfig& cfg, llm::ChatBackend& backend,
                           std::uint64_t seed, int attempt_id, const EngineOptions& options) {
    validate(ctx);
    const auto& templates = templates_of(options);
    const GenerationContext view = context_view(ctx, cfg, options.log);

    DialogueTrace trace;
    trace.config = cfg;
    trace.context = view;
    trace.seed = seed;
    trace.attempt_id = attempt_id;

    Session session(backend, options, options.tag_prefix + "/" + cfg.label() + "/attempt" + std::to_string(attempt_id));

    const auto fail = [&](const BackendError& e) -> BackendFailure {
        std::optional<DialogueTrace> partial;
        if (!trace.turns.empty()) {
            trace.termination = Termination::BackendFailure;
            trace.final_question = trace.last_student_turn().question;
            partial = trace;
        }
        return BackendFailure(std::string("backend failure during dialogue: ") + e.what(), e.code(), std::move(partial));
    };

    try {
        {
            session.set_default_note(agents::student_reprompt_note());
            auto first = session.call(agents::render_student_initial(view, templates), options.student, "student/0",
                                      [&](std::string_view raw) { return parse_student_or_reject(raw, 0, options.log); });
            first.value.rejected_replies = std::move(first.rejected);
            trace.turns.emplace_back(std::move(first.value));
        }

        const bool fixed = !cfg.regime.is_dynamic();
        const int limit = fixed ? cfg.regime.rounds() : cfg.regime.cap();
        trace.termination = fixed ? Termination::FixedRoundsExhausted : Termination::CapReached;

        for (int k = 1; k <= limit; ++k) {
            const StudentTurn current = trace.last_student_turn();

            session.set_default_note(agents::educator_reprompt_note());
            std::vector<std::string> refused_approvals;
            auto coached = session.call(
                agents::render_educator(view, current, templates), options.educator, "educator/" + std::to_string(k),
                [&](std::string_view raw) -> agents::CoachingOutcome {
                    agents::CoachingOutcome outcome;
                    try {
                        outcome = agents::parse_educator_reply(raw, k);
                    } catch (const EmptyFeedback& e) {
                        throw Rejected{e.what(), agents::educator_reprompt_note()};
                    }
                    if (fixed && std::holds_alternative<agents::Approve>(outcome)) {
                        throw Rejected{"approval refused under a fixed regime", agents::no_approval_note()};
                    }
                    return outcome;
                });

            if (std::holds_alternative<agents::Approve>(coached.value)) {
                trace.approval_reply = coached.raw;
                trace.approval_rejected_replies = std::move(coached.rejected);
                trace.termination = Termination::EducatorApproved;
                break;
            }
            auto coaching = std::get<CoachingTurn>(std::move(coached.value));
            coaching.rejected_replies = std::move(coached.rejected);
            if (coaching.feedback_question.find('?') == std::string::npos && options.log != nullptr) {
                options.log->warn("dialogue_drift",
                                  cfg.label() + " attempt " + std::to_string(attempt_id) + " round " +
                                      std::to_string(k) + ": educator feedback contains no question");
            }
            trace.turns.emplace_back(coaching);

            session.set_default_note(agents::student_reprompt_note());
            auto revised = session.call(
                agents::render_student_revision(view, current, coaching, templates), options.student,
                "student/" + std::to_string(k),
                [&](std::string_view raw) { return parse_student_or_reject(raw, k, options.log); });
            revised.value.rejected_replies = std::move(revised.rejected);
            trace.turns.emplace_back(std::move(revised.value));
        }
    } catch (const BackendError& e) {
        throw fail(e);
    }

    trace.final_question = trace.last_student_turn().question;
    validate(trace);
    return trace;
}

StudentTurn one_shot_generate(const GenerationContext& ctx, const ExperimentConfig& cfg, llm::ChatBackend& backend,
                              const EngineOptions& options) {
    validate(ctx);
    const GenerationContext view = context_view(ctx, cfg, options.log);
    Session session(backend, options, options.tag_prefix + "/oneshot/" + cfg.label());
    session.set_default_note(agents::student_reprompt_note());
    try {
        auto result = session.call(agents::render_student_initial(view, templates_of(options)), options.student,
                                   "student/0",
                                   [&](std::string_view raw) { return parse_student_or_reject(raw, 0, options.log); });
        result.value.rejected_replies = std::move(result.rejected);
        return std::move(result.value);
    } catch (const BackendError& e) {
        throw BackendFailure(std::string("backend failure during one-shot generation: ") + e.what(), e.code(),
                             std::nullopt);
    }
}

std::vector<std::string> replay_script(const DialogueTrace& trace) {
    std::vector<std::string> script;
    const auto append = [&](const std::vector<std::string>& rejected, const std::string& raw) {
        script.insert(script.end(), rejected.begin(), rejected.end());
        script.push_back(raw);
    };
    for (const auto& turn : trace.turns) {
        if (const auto* s = std::get_if<StudentTurn>(&turn)) {
            append(s->rejected_replies, s->raw_reply);
        } else {
            const auto& c = std::get<CoachingTurn>(turn);
            append(c.rejected_replies, c.raw_reply);
        }
    }
    if (trace.approval_reply) append(trace.approval_rejected_replies, *trace.approval_reply);
    return script;
}

}  // namespace socratic::dialogue
