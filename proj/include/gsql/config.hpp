#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "gsql/harness.hpp"

namespace gsql {

/// Parses an experiment configuration document. Unknown keys, wrong types and
/// out-of-range values raise ConfigInvalid naming the dotted field path.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical form with every field present; the basis of config_hash.
nlohmann::json config_to_json(const ExperimentConfig& config);
/// 16 hex digits identifying the configuration (seed included).
std::string config_hash(const ExperimentConfig& config);

}  // namespace gsql
