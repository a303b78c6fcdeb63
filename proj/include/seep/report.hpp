#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "seep/metrics.hpp"
#include "seep/propagation.hpp"
#include "seep/synth.hpp"

namespace seep {

/// JSON value for an optional ratio: the number, or the string "undefined".
nlohmann::json ratio_json(const std::optional<double>& v);

nlohmann::json to_json(const DetectionReport& r);
nlohmann::json to_json(const PropagationConfig& c);
nlohmann::json to_json(const IterationRecord& r);
nlohmann::json to_json(const EvalReport& r);
nlohmann::json to_json(const SyntheticConfig& c);

/// Unknown keys are rejected; missing keys keep their defaults.
SyntheticConfig synthetic_config_from_json(const nlohmann::json& j);

/// Writes `j` pretty-printed with a trailing newline.
void write_json_file(const std::filesystem::path& file, const nlohmann::json& j);
void write_text_file(const std::filesystem::path& file, const std::string& text);

}  // namespace seep
