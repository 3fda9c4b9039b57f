#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "sdf/cascade.hpp"

namespace sdf {

inline constexpr int kFormatVersion = 1;

/// Full config image; every key is written.
nlohmann::json config_to_json(const CascadeConfig& cfg);
/// Starts from `base` and overrides the keys present in `j`. Unknown keys and
/// wrongly typed values throw ConfigError.
CascadeConfig config_from_json(const nlohmann::json& j, const CascadeConfig& base = {});
CascadeConfig load_config(const std::filesystem::path& path, const CascadeConfig& base = {});

nlohmann::json model_to_json(const SDFModel& m);
/// Schema errors throw DataError; broken model invariants throw InvariantError
/// naming the level, slot and fold.
SDFModel model_from_json(const nlohmann::json& j);

/// Canonical text: sorted keys, shortest round-trip doubles, trailing newline.
std::string dump_canonical(const nlohmann::json& j);

void save_model(const SDFModel& m, const std::filesystem::path& path);
SDFModel load_model(const std::filesystem::path& path);

} // namespace sdf
