#pragma once

#include <exception>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>

#include "cttp/cli/config.hpp"
#include "cttp/dataio/report.hpp"
#include "cttp/eval/full_eval.hpp"
#include "cttp/eval/projection.hpp"
#include "cttp/pretrain/pretrain.hpp"

namespace cttp::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kExitOk = 0, kExitOther = 1, kExitConfig = 2, kExitData = 3, kExitNumeric = 4 };

/// ConfigError -> 2, DataError -> 3, NumericError -> 4, anything else -> 1.
int exit_code_for(const std::exception& e);

inline constexpr const char* kResolvedConfigName = "config.ini";
inline constexpr const char* kCheckpointName = "checkpoint.ckpt";
inline constexpr const char* kLossTraceName = "loss_trace.json";

void write_resolved_config(const fs::path& path, const ExperimentConfig& config);

/// Generates the dataset into `out` with its resolved config. A non-empty
/// `out` is a ConfigError unless `force`, which overwrites.
sim::Dataset cmd_gen(const ExperimentConfig& config, const fs::path& out, bool force, std::ostream& log);

/// Trains config.pretrain.mode on <data>/pretrain and writes the checkpoint
/// (refreshed at every epoch end), the loss trace and the resolved config
/// into `out`.
pretrain::PretrainResult cmd_pretrain(const ExperimentConfig& config, const fs::path& data, const fs::path& out,
                                      std::ostream& log);

/// `path` may be a checkpoint file or a directory holding one.
model::DualEncoder<float> load_encoder(const fs::path& path);

struct EvalRequest {
    std::map<std::string, fs::path> checkpoints; // method -> checkpoint
    std::optional<eval::CellRequest> cell;       // unset: full evaluation
};

/// Full evaluation needs all five methods; a single cell needs exactly one
/// checkpoint. Writes the report and "<report stem>.config.ini" beside it.
io::EvalReport cmd_eval(const ExperimentConfig& config, const EvalRequest& request, const fs::path& data,
                        const fs::path& report, std::ostream& log);

/// Batch-size sweep over config.sweep_sizes; writes sweep.json plus one
/// run directory per size under `out`.
io::EvalReport cmd_sweep(const ExperimentConfig& config, const fs::path& data, const fs::path& out,
                         std::ostream& log);

/// 2-D projection of probe-test and unseen-tools-test, both sensors.
std::vector<eval::ProjectionRow> cmd_project(const ExperimentConfig& config, const fs::path& checkpoint,
                                             const fs::path& data, eval::ProjectionMethod method,
                                             const fs::path& out_csv, std::ostream& log);

/// Runs the gradient-check suite, writes its JSON to `report` when given,
/// returns whether every case passed.
bool cmd_gradcheck(const std::optional<fs::path>& report, std::ostream& log);

/// gen, pretrain for every mode, full evaluation, sweep and both
/// projections of the cttp checkpoint, all under `out`; report.json holds
/// the combined comparison.
io::EvalReport cmd_paper(const ExperimentConfig& config, const fs::path& out, bool force, std::ostream& log);

} // namespace cttp::cli
