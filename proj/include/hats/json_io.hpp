#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "hats/decode_engine.hpp"
#include "hats/detector.hpp"
#include "hats/params.hpp"

namespace hats {

nlohmann::json to_json(const PartitionParams& params);

/// Starts from `base` and overrides every field present in `doc`; unknown
/// keys and wrongly typed values throw InputError naming the key.
PartitionParams params_from_json(const nlohmann::json& doc, PartitionParams base = {});

nlohmann::json to_json(const DetectionReport& report);
DetectionReport report_from_json(const nlohmann::json& doc);

/// {prompt_tokens, completion_tokens, params, per_step_labels}
nlohmann::json to_json(const GenerationRecord& record);
GenerationRecord generation_from_json(const nlohmann::json& doc);

/// One token stream from a JSON-lines entry: a bare id array, {"tokens": [...]},
/// or a generation record (its completion tokens).
std::vector<TokenId> tokens_from_json_line(const nlohmann::json& doc);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

/// Every non-blank line of a JSON-lines file, parsed. Errors carry the line number.
std::vector<nlohmann::json> read_json_lines(const std::filesystem::path& path);

}  // namespace hats
