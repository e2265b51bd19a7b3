#include "socratic/serialization.hpp"

#include <fstream>
#include <sstream>

#include "socratic/errors.hpp"

namespace socratic {

void to_json(json& j, const MaterialDocument& doc) {
    j = json{{"name", doc.name}, {"body", doc.body}, {"origin", to_string(doc.origin)}};
}

void from_json(const json& j, MaterialDocument& doc) {
    doc.name = j.value("name", std::string{});
    doc.body = j.at("body").get<std::string>();
    doc.origin = material_origin_from_string(j.value("origin", std::string{"other"}));
}

void to_json(json& j, const GenerationContext& ctx) {
    j = json{{"topic", ctx.topic}, {"concepts", ctx.concepts}};
    if (ctx.student_level) j["level"] = *ctx.student_level;
    if (ctx.materials) j["materials"] = *ctx.materials;
    if (!ctx.constraints.empty()) j["constraints"] = ctx.constraints;
    if (ctx.prior_question) j["prior_question"] = *ctx.prior_question;
}

void from_json(const json& j, GenerationContext& ctx) {
    ctx = load_context(j, {});
}

GenerationContext load_context(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ValidationError("context must be a JSON object");
    GenerationContext ctx;
    ctx.topic = j.value("topic", std::string{});
    if (j.contains("concepts")) {
        ctx.concepts = j.at("concepts").get<std::vector<std::string>>();
    } else if (j.contains("concepts_file")) {
        std::istringstream lines(read_file(base_dir / j.at("concepts_file").get<std::string>()));
        for (std::string line; std::getline(lines, line);) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.find_first_not_of(" \t") != std::string::npos) ctx.concepts.push_back(line);
        }
    }
    if (j.contains("level") && !j.at("level").is_null()) ctx.student_level = j.at("level").get<std::string>();
    if (j.contains("materials") && !j.at("materials").is_null()) {
        std::vector<MaterialDocument> docs;
        for (const auto& m : j.at("materials")) {
            MaterialDocument doc;
            doc.origin = material_origin_from_string(m.value("origin", std::string{"other"}));
            if (m.contains("path")) {
                const auto path = base_dir / m.at("path").get<std::string>();
                doc.body = read_file(path);
                doc.name = m.value("name", path.filename().string());
            } else {
                doc.body = m.at("body").get<std::string>();
                doc.name = m.value("name", std::string{});
            }
            docs.push_back(std::move(doc));
        }
        ctx.materials = std::move(docs);
    }
    if (j.contains("constraints")) ctx.constraints = j.at("constraints").get<std::vector<std::string>>();
    if (j.contains("prior_question") && !j.at("prior_question").is_null()) {
        ctx.prior_question = j.at("prior_question").get<std::string>();
    }
    return ctx;
}

void to_json(json& j, const ExperimentConfig& cfg) {
    j = json{{"label", cfg.label()},
             {"regime", cfg.regime.code()},
             {"level", cfg.level_provided},
             {"materials", cfg.materials_provided}};
    if (cfg.regime.is_dynamic()) {
        j["cap"] = cfg.regime.cap();
    } else {
        j["rounds"] = cfg.regime.rounds();
    }
}

void from_json(const json& j, ExperimentConfig& cfg) {
    if (j.is_string()) {
        cfg = ExperimentConfig::parse_label(j.get<std::string>());
        return;
    }
    const auto code = j.at("regime").get<std::string>();
    if (code == "DYN") {
        cfg.regime = IterationRegime::dynamic(j.value("cap", kDefaultDynamicCap));
    } else {
        cfg.regime = j.contains("rounds") ? IterationRegime::fixed(j.at("rounds").get<int>())
                                          : IterationRegime::parse(code);
    }
    cfg.level_provided = j.at("level").get<bool>();
    cfg.materials_provided = j.at("materials").get<bool>();
}

namespace {

json student_json(const StudentTurn& s) {
    return json{{"question", s.question},
                {"rationale", s.rationale},
                {"raw", s.raw_reply},
                {"rejected", s.rejected_replies}};
}

StudentTurn student_from(const json& j, int index) {
    StudentTurn s;
    s.question = j.at("question").get<std::string>();
    s.rationale = j.at("rationale").get<std::string>();
    s.raw_reply = j.value("raw", std::string{});
    s.rejected_replies = j.value("rejected", std::vector<std::string>{});
    s.iteration_index = index;
    return s;
}

}  // namespace

json attempt_to_json(const DialogueTrace& trace) {
    json iterations = json::array();
    for (const auto& turn : trace.turns) {
        if (const auto* s = std::get_if<StudentTurn>(&turn)) {
            iterations.push_back(json{{"index", s->iteration_index}, {"student", student_json(*s)}});
        } else {
            const auto& c = std::get<CoachingTurn>(turn);
            if (iterations.empty()) throw ValidationError("trace starts with a coaching turn");
            iterations.back()["teacher"] = json{
                {"feedback", c.feedback_question}, {"raw", c.raw_reply}, {"rejected", c.rejected_replies}};
        }
    }
    if (trace.approval_reply) {
        if (iterations.empty()) throw ValidationError("approval without a student turn");
        iterations.back()["teacher"] = json{
            {"approval", true}, {"raw", *trace.approval_reply}, {"rejected", trace.approval_rejected_replies}};
    }
    return json{{"attempt_id", trace.attempt_id},
                {"seed", trace.seed},
                {"termination", to_string(trace.termination)},
                {"final_question", trace.final_question},
                {"iterations", std::move(iterations)}};
}

DialogueTrace attempt_from_json(const json& j, const ExperimentConfig& cfg, const GenerationContext& ctx) {
    DialogueTrace trace;
    trace.config = cfg;
    trace.context = ctx;
    trace.attempt_id = j.at("attempt_id").get<int>();
    trace.seed = j.at("seed").get<std::uint64_t>();
    trace.termination = termination_from_string(j.at("termination").get<std::string>());
    trace.final_question = j.at("final_question").get<std::string>();
    for (const auto& it : j.at("iterations")) {
        const int index = it.at("index").get<int>();
        trace.turns.emplace_back(student_from(it.at("student"), index));
        if (!it.contains("teacher")) continue;
        const auto& t = it.at("teacher");
        if (t.value("approval", false)) {
            trace.approval_reply = t.value("raw", std::string{});
            trace.approval_rejected_replies = t.value("rejected", std::vector<std::string>{});
        } else {
            CoachingTurn c;
            c.feedback_question = t.at("feedback").get<std::string>();
            c.raw_reply = t.value("raw", std::string{});
            c.rejected_replies = t.value("rejected", std::vector<std::string>{});
            c.iteration_index = index + 1;
            trace.turns.emplace_back(std::move(c));
        }
    }
    return trace;
}

void to_json(json& j, const DialogueTrace& trace) {
    j = attempt_to_json(trace);
    j["config"] = trace.config;
    j["context"] = trace.context;
}

void from_json(const json& j, DialogueTrace& trace) {
    trace = attempt_from_json(j, j.at("config").get<ExperimentConfig>(), j.at("context").get<GenerationContext>());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw StoreError("cannot write " + tmp.string());
        out << contents;
        if (!out.flush()) throw StoreError("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace socratic
