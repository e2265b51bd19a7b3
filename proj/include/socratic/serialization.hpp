#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "socratic/domain.hpp"

namespace socratic {

using nlohmann::json;

void to_json(json& j, const MaterialDocument& doc);
void from_json(const json& j, MaterialDocument& doc);

/// Materials may carry either an inline "body" or a "path"; paths are
/// resolved relative to `base_dir` by `load_context`.
void to_json(json& j, const GenerationContext& ctx);
void from_json(const json& j, GenerationContext& ctx);
GenerationContext load_context(const json& j, const std::filesystem::path& base_dir);

void to_json(json& j, const ExperimentConfig& cfg);
void from_json(const json& j, ExperimentConfig& cfg);

/// One attempt in the trace-file layout:
/// {attempt_id, seed, termination, final_question, iterations:[{index,
///  student:{question, rationale, raw, rejected}, teacher:{feedback, raw,
///  rejected} | {approval:true, raw, rejected}}]}.
json attempt_to_json(const DialogueTrace& trace);
DialogueTrace attempt_from_json(const json& j, const ExperimentConfig& cfg, const GenerationContext& ctx);

/// A self-contained trace: the attempt layout plus config and context.
void to_json(json& j, const DialogueTrace& trace);
void from_json(const json& j, DialogueTrace& trace);

std::string read_file(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename so readers never see a torn file.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace socratic
