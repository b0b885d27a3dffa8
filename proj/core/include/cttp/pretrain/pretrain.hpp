#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cttp/model/encoder.hpp"
#include "cttp/model/losses.hpp"
#include "cttp/sensorsim/records.hpp"

namespace cttp::pretrain {

enum class Mode { cttp, recon, sup_class, sup_pose, random };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& name); // ConfigError on unknown names
inline constexpr Mode kAllModes[] = {Mode::cttp, Mode::recon, Mode::sup_class, Mode::sup_pose, Mode::random};
inline constexpr Mode kBaselineModes[] = {Mode::recon, Mode::sup_class, Mode::sup_pose, Mode::random};

struct PretrainConfig {
    Mode mode = Mode::cttp;
    std::size_t batch_size = 128;
    std::size_t epochs = 30;
    double lr = 1e-3; // 3e-4 is the 100-epoch setting; too slow for 30 epochs
    model::ContrastiveConfig contrastive;
    std::uint64_t seed = 1;
    model::ArchConfig arch;
    // cttp only: share weights above the sensor-specific first conv,
    // projection head included. Baselines always train independent towers.
    bool tie_towers = true;
};

void validate(const PretrainConfig& config);

/// Row i of gel and membrane comes from the same record.
struct BatchPairs {
    std::vector<std::size_t> indices;
    ad::Tensor<float> gel;      // [N, 3, H, W]
    ad::Tensor<float> membrane; // [N, 1, H, W]
    std::vector<sim::GraspSample> grasps;
};

/// Seeded permutation of [0, n) cut into full batches; the remainder is
/// dropped. DataError when n < batch_size.
std::vector<std::vector<std::size_t>> batch_indices(std::size_t n, std::size_t batch_size, std::uint64_t epoch_seed);
BatchPairs make_batch(std::span<const sim::PairedRecord> records, std::vector<std::size_t> indices);
std::vector<BatchPairs> build_batches(std::span<const sim::PairedRecord> records, std::size_t batch_size,
                                      std::uint64_t epoch_seed);
std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch);

/// Class index for each tool id present in the split, ascending by id.
std::vector<std::uint32_t> class_tool_ids(std::span<const sim::PairedRecord> records);

struct PretrainResult {
    PretrainConfig config;
    model::DualEncoder<float> encoder;
    std::vector<double> step_losses;
    std::vector<double> epoch_losses;
    double initial_loss = 0.0; // loss of the first step, before any update
};

/// Called after every epoch with the 1-based epoch number.
using EpochCallback = std::function<void(std::size_t epoch, const PretrainResult&)>;

PretrainResult pretrain_cttp(const PretrainConfig& config, std::span<const sim::PairedRecord> records,
                             const EpochCallback& on_epoch = {});
PretrainResult pretrain_baseline(const PretrainConfig& config, std::span<const sim::PairedRecord> records,
                                 const EpochCallback& on_epoch = {});
PretrainResult run_pretrain(const PretrainConfig& config, std::span<const sim::PairedRecord> records,
                            const EpochCallback& on_epoch = {});

nlohmann::json config_to_json(const PretrainConfig& config);
nlohmann::json loss_trace_json(const PretrainResult& result);

} // namespace cttp::pretrain
