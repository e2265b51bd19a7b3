#include "socratic/judge.hpp"

#include "socratic/errors.hpp"
#include "socratic/text.hpp"

namespace socratic::judge {

using nlohmann::json;

PairAssignment assign_positions(std::string alpha_qid, std::string beta_qid, std::uint64_t draw) {
    if (alpha_qid == beta_qid) throw ValidationError("cannot pair question '" + alpha_qid + "' with itself");
    const Position pos = (draw & 1u) == 0 ? Position::Question1 : Position::Question2;
    return PairAssignment{std::move(alpha_qid), std::move(beta_qid), pos, draw};
}

PairAssignment assign_positions(std::string alpha_qid, std::string beta_qid, std::mt19937_64& rng) {
    return assign_positions(std::move(alpha_qid), std::move(beta_qid), rng());
}

bool is_valid_score(int d) noexcept { return d == -2 || d == -1 || d == 1 || d == 2; }

int orient(int d_raw, Position alpha_position) {
    if (!is_valid_score(d_raw)) {
        throw ValidationError("difference score must be one of -2, -1, 1, 2; got " + std::to_string(d_raw));
    }
    return alpha_position == Position::Question1 ? -d_raw : d_raw;
}

Rational unit_score(int d_oriented) {
    if (!is_valid_score(d_oriented)) {
        throw ValidationError("oriented score must be one of -2, -1, 1, 2; got " + std::to_string(d_oriented));
    }
    return Rational(2 + d_oriented, 4);
}

RawScore parse_judge_reply(std::string_view raw) {
    const auto open = raw.find('{');
    const auto close = raw.rfind('}');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
        throw JudgeProtocolError("judge reply contains no JSON object");
    }
    json doc;
    try {
        doc = json::parse(raw.substr(open, close - open + 1));
    } catch (const json::exception& e) {
        throw JudgeProtocolError(std::string("judge reply is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("score")) throw JudgeProtocolError("judge reply has no 'score'");

    const json& score = doc.at("score");
    int d = 0;
    if (score.is_number_integer()) {
        d = score.get<int>();
    } else if (score.is_number_float() && score.get<double>() == static_cast<int>(score.get<double>())) {
        d = static_cast<int>(score.get<double>());
    } else if (score.is_string()) {
        try {
            std::size_t used = 0;
            const std::string s(text::trim(score.get<std::string>()));
            d = std::stoi(s, &used);
            if (used != s.size()) throw JudgeProtocolError("score '" + s + "' is not an integer");
        } catch (const std::logic_error&) {
            throw JudgeProtocolError("score is not an integer");
        }
    } else {
        throw JudgeProtocolError("score is not an integer");
    }
    if (d == 0) throw JudgeProtocolError("score 0 is not allowed; a strict preference is required");
    if (!is_valid_score(d)) throw JudgeProtocolError("score " + std::to_string(d) + " is outside {-2,-1,1,2}");

    RawScore result;
    result.d_raw = d;
    if (doc.contains("justification") && doc.at("justification").is_string()) {
        result.justification = doc.at("justification").get<std::string>();
    }
    return result;
}

RawScore elicit_raw_score(const PairAssignment& assignment, std::string_view alpha_text, std::string_view beta_text,
                          Criterion criterion, std::string_view topic, const std::vector<std::string>& concepts,
                          llm::ChatBackend& backend, const JudgeOptions& options) {
    const bool alpha_first = assignment.alpha_position == Position::Question1;
    const auto& templates = options.templates != nullptr ? *options.templates : agents::default_templates();
    const auto bundle = agents::render_judge(alpha_first ? alpha_text : beta_text, alpha_first ? beta_text : alpha_text,
                                             criterion, topic, concepts, templates);

    const std::string tag = options.tag_prefix + "/" + std::string(slug(criterion)) + "/" +
                            assignment.alpha_question_id + "_vs_" + assignment.beta_question_id;
    auto req = bundle.to_request(options.evaluator, tag);
    std::vector<std::string> rejected;
    std::string last_error;
    for (int attempt = 1; attempt <= options.max_tries; ++attempt) {
        if (attempt > 1) req.request_tag = tag + "#retry" + std::to_string(attempt - 1);
        std::string raw;
        try {
            raw = backend.complete(req).content;
            RawScore score = parse_judge_reply(raw);
            score.rejected_replies = std::move(rejected);
            return score;
        } catch (const ResponseEmpty& e) {
            last_error = e.what();
        } catch (const JudgeProtocolError& e) {
            last_error = e.what();
        }
        if (!text::trim(raw).empty()) req.messages.push_back({llm::Role::Assistant, raw});
        req.messages.push_back({llm::Role::User, std::string(agents::judge_reprompt_note())});
        rejected.push_back(std::move(raw));
    }
    throw JudgeProtocolError(tag + ": no valid score after " + std::to_string(options.max_tries) + " tries (" +
                             last_error + ")");
}

Judgment judge_pair(const QuestionRef& alpha, const QuestionRef& beta, Criterion criterion, std::string_view topic,
                    const std::vector<std::string>& concepts, llm::ChatBackend& backend, std::mt19937_64& rng,
                    const JudgeOptions& options) {
    const PairAssignment assignment = assign_positions(alpha.id, beta.id, rng);
    const RawScore raw =
        elicit_raw_score(assignment, alpha.text, beta.text, criterion, topic, concepts, backend, options);

    Judgment j;
    j.criterion = criterion;
    j.alpha_question_id = alpha.id;
    j.beta_question_id = beta.id;
    j.alpha_position = assignment.alpha_position;
    j.d_raw = raw.d_raw;
    j.d_oriented = orient(raw.d_raw, assignment.alpha_position);
    j.unit_score = unit_score(j.d_oriented);
    j.justification = raw.justification;
    j.evaluator_model = options.evaluator.model;
    return j;
}

void validate(const Judgment& j) {
    if (!is_valid_score(j.d_raw)) throw ValidationError("judgment d_raw out of range");
    if (j.d_oriented != orient(j.d_raw, j.alpha_position)) throw ValidationError("judgment orientation inconsistent");
    if (j.unit_score != unit_score(j.d_oriented)) throw ValidationError("judgment unit score inconsistent");
}

json to_json(const JudgmentRecord& record) {
    const Judgment& j = record.judgment;
    return json{{"criterion", slug(j.criterion)},
                {"alpha", record.alpha_config},
                {"beta", record.beta_config},
                {"alpha_qid", j.alpha_question_id},
                {"beta_qid", j.beta_question_id},
                {"alpha_position", to_string(j.alpha_position)},
                {"d_raw", j.d_raw},
                {"d_oriented", j.d_oriented},
                {"unit_score_num", j.unit_score.num()},
                {"unit_score_den", j.unit_score.den()},
                {"justification", j.justification},
                {"evaluator_model", j.evaluator_model},
                {"seed_path", record.seed_path},
                {"timestamp", record.timestamp_ms}};
}

JudgmentRecord record_from_json(const json& doc) {
    JudgmentRecord record;
    Judgment& j = record.judgment;
    j.criterion = criterion_from_string(doc.at("criterion").get<std::string>());
    record.alpha_config = doc.at("alpha").get<std::string>();
    record.beta_config = doc.at("beta").get<std::string>();
    j.alpha_question_id = doc.at("alpha_qid").get<std::string>();
    j.beta_question_id = doc.at("beta_qid").get<std::string>();
    j.alpha_position = position_from_string(doc.at("alpha_position").get<std::string>());
    j.d_raw = doc.at("d_raw").get<int>();
    j.d_oriented = doc.at("d_oriented").get<int>();
    j.unit_score = Rational(doc.at("unit_score_num").get<std::int64_t>(), doc.at("unit_score_den").get<std::int64_t>());
    j.justification = doc.value("justification", std::string{});
    j.evaluator_model = doc.value("evaluator_model", std::string{});
    record.seed_path = doc.at("seed_path").get<std::string>();
    record.timestamp_ms = doc.value("timestamp", std::int64_t{0});
    validate(j);
    return record;
}

}  // namespace socratic::judge
