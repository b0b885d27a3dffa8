#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>

#include "cttp/sensorsim/dataset.hpp"

namespace cttp::io {

inline constexpr int kManifestVersion = 1;

nlohmann::json dataset_config_to_json(const sim::DatasetConfig& config);
sim::DatasetConfig dataset_config_from_json(const nlohmann::json& j);

/// Manifest describing a dataset directory: version, seed, image size,
/// tool table with SDF parameters, split table and sensor parameters.
nlohmann::json make_manifest(const sim::Dataset& dataset);

/// Writes manifest.json plus one <split>.bin file per split.
void write_dataset(const std::filesystem::path& dir, const sim::Dataset& dataset);

/// Reads the manifest, checks every split file exists and its header count
/// matches, then loads all records.
sim::Dataset load_dataset(const std::filesystem::path& dir);

/// Header-only validation of a dataset directory.
void validate_dataset_dir(const std::filesystem::path& dir);

std::string split_file_name(const std::string& split);

} // namespace cttp::io
