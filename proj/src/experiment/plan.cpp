#include <algorithm>
#include <cstring>
#include <set>

#include <openssl/evp.h>

#include "socratic/experiment.hpp"
#include "socratic/serialization.hpp"
#include "socratic/text.hpp"

namespace socratic::experiment {

using nlohmann::json;

namespace {

void append_le64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::array<unsigned char, 32> sha256(const std::string& bytes) {
    std::array<unsigned char, 32> digest{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1 || len != 32) {
        throw Error("DigestFailure", "SHA-256 computation failed");
    }
    return digest;
}

ExperimentConfig config_from_plan_entry(const json& entry, int cap) {
    if (entry.is_string()) return ExperimentConfig::parse_label(entry.get<std::string>(), cap);
    if (entry.is_object() && entry.contains("label")) {
        return ExperimentConfig::parse_label(entry.at("label").get<std::string>(), entry.value("cap", cap));
    }
    auto cfg = entry.get<ExperimentConfig>();
    if (cfg.regime.is_dynamic() && !entry.contains("cap")) cfg.regime = IterationRegime::dynamic(cap);
    return cfg;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master_seed, const std::vector<std::string>& path) {
    if (path.empty()) throw ValidationError("seed derivation path must not be empty");
    std::string bytes;
    append_le64(bytes, master_seed);
    for (const auto& label : path) {
        append_le64(bytes, label.size());
        bytes += label;
    }
    const auto digest = sha256(bytes);
    std::uint64_t seed = 0;
    for (int i = 7; i >= 0; --i) seed = (seed << 8) | digest[static_cast<std::size_t>(i)];
    return seed;
}

void validate(const ExperimentPlan& plan) {
    validate(plan.context);
    if (plan.questions_per_config < 1) throw ValidationError("questions_per_config must be at least 1");
    if (plan.configs.empty()) throw ValidationError("plan lists no configs");
    std::set<std::string> labels;
    for (const auto& cfg : plan.configs) {
        if (!labels.insert(cfg.label()).second) throw ValidationError("config listed twice: " + cfg.label());
    }
    if (plan.criteria.empty()) throw ValidationError("plan lists no criteria");
    std::set<Criterion> seen(plan.criteria.begin(), plan.criteria.end());
    if (seen.size() != plan.criteria.size()) throw ValidationError("criterion listed twice");
    if (plan.parallelism < 1) throw ValidationError("parallelism must be at least 1");
    if (plan.dynamic_cap < 1) throw ValidationError("dynamic_cap must be at least 1");
    if (plan.budget_tokens && *plan.budget_tokens <= 0) throw ValidationError("budget_tokens must be positive");
    if (text::trim(plan.backbone_model).empty() || text::trim(plan.evaluator_model).empty()) {
        throw ValidationError("model identifiers must not be empty");
    }
}

ExperimentPlan plan_from_json(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ValidationError("plan must be a JSON object");
    ExperimentPlan plan;
    try {
        plan.dynamic_cap = j.value("dynamic_cap", kDefaultDynamicCap);
        plan.context = load_context(j.contains("context") ? j.at("context") : j, base_dir);
        if (j.contains("configs") && !j.at("configs").is_null()) {
            plan.configs.clear();
            for (const auto& entry : j.at("configs")) plan.configs.push_back(config_from_plan_entry(entry, plan.dynamic_cap));
        } else {
            plan.configs = canonical_config_grid(plan.dynamic_cap);
        }
        plan.questions_per_config = j.value("questions_per_config", 5);
        if (j.contains("criteria") && !j.at("criteria").is_null()) {
            plan.criteria.clear();
            for (const auto& c : j.at("criteria")) plan.criteria.push_back(criterion_from_string(c.get<std::string>()));
        }
        plan.master_seed = j.value("master_seed", std::uint64_t{0});
        plan.backbone_model = j.value("backbone_model", plan.backbone_model);
        plan.evaluator_model = j.value("evaluator_model", plan.evaluator_model);
        if (j.contains("budget_tokens") && !j.at("budget_tokens").is_null()) {
            plan.budget_tokens = j.at("budget_tokens").get<std::int64_t>();
        }
        plan.parallelism = j.value("parallelism", 1);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed plan: ") + e.what());
    }
    validate(plan);
    return plan;
}

ExperimentPlan load_plan(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ValidationError("plan " + path.string() + " is not valid JSON: " + e.what());
    }
    return plan_from_json(doc, path.parent_path());
}

namespace {

json output_fields(const ExperimentPlan& plan) {
    json configs = json::array();
    for (const auto& cfg : plan.configs) configs.push_back(cfg.label());
    json criteria = json::array();
    for (const auto c : plan.criteria) criteria.push_back(slug(c));
    return json{{"context", plan.context},
                {"configs", std::move(configs)},
                {"questions_per_config", plan.questions_per_config},
                {"criteria", std::move(criteria)},
                {"master_seed", plan.master_seed},
                {"backbone_model", plan.backbone_model},
                {"evaluator_model", plan.evaluator_model},
                {"dynamic_cap", plan.dynamic_cap}};
}

}  // namespace

json plan_to_json(const ExperimentPlan& plan) {
    json j = output_fields(plan);
    j["budget_tokens"] = plan.budget_tokens ? json(*plan.budget_tokens) : json(nullptr);
    j["parallelism"] = plan.parallelism;
    return j;
}

std::string plan_hash(const ExperimentPlan& plan) {
    static constexpr char kHex[] = "0123456789abcdef";
    const auto digest = sha256(output_fields(plan).dump());
    std::string hex;
    for (const unsigned char b : digest) {
        hex.push_back(kHex[b >> 4]);
        hex.push_back(kHex[b & 0xF]);
    }
    return hex;
}

std::string run_id(std::string_view experiment, const ExperimentPlan& plan) {
    return std::string(experiment) + "-" + plan_hash(plan).substr(0, 12);
}

}  // namespace socratic::experiment
