#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cttp/eval/full_eval.hpp"
#include "cttp/eval/projection.hpp"
#include "cttp/pretrain/pretrain.hpp"
#include "cttp/sensorsim/dataset.hpp"

namespace cttp::cli {

/// Everything a command reads. Sections of the config file map onto the
/// members: dataset, model, pretrain, probes, eval, sweep.
struct ExperimentConfig {
    sim::DatasetConfig dataset;
    pretrain::PretrainConfig pretrain; // arch and tie_towers come from [model]
    eval::EvalConfig eval;
    eval::TsneConfig tsne;
    std::vector<std::size_t> sweep_sizes{8, 32, 128, 256};
};

struct ConfigKey {
    std::string section;
    std::string key;
    std::string doc;
};

/// Every recognised key in file order, with its documentation.
const std::vector<ConfigKey>& config_keys();

/// Sets "section.key" from text. ConfigError for unknown keys or values
/// that do not parse.
void set_value(ExperimentConfig& config, const std::string& section, const std::string& key,
               const std::string& value);
std::string get_value(const ExperimentConfig& config, const std::string& section, const std::string& key);

/// Applies a sectioned key = value file on top of `config`.
void apply_config_text(ExperimentConfig& config, const std::string& text, const std::string& origin = "<config>");
void apply_config_file(ExperimentConfig& config, const std::string& path);

/// Environment overrides CTTP_<SECTION>_<KEY>, e.g. CTTP_PRETRAIN_EPOCHS=2.
/// `getenv` is injectable for tests.
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
void apply_env(ExperimentConfig& config, const EnvLookup& getenv);
void apply_env(ExperimentConfig& config);
std::string env_name(const std::string& section, const std::string& key);

/// Cross-field checks (positive sizes, ordered ranges, ...).
void validate(const ExperimentConfig& config);

/// Resolved config in the same file format, every key present and
/// documented; parsing it back reproduces `config`.
std::string to_config_text(const ExperimentConfig& config);

} // namespace cttp::cli
