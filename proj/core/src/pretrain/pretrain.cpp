#include "cttp/pretrain/pretrain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cttp/autodiff/adam.hpp"
#include "cttp/autodiff/tape.hpp"
#include "cttp/error.hpp"
#include "cttp/model/heads.hpp"

namespace cttp::pretrain {

std::string to_string(Mode mode) {
    switch (mode) {
    case Mode::cttp: return "cttp";
    case Mode::recon: return "recon";
    case Mode::sup_class: return "sup-class";
    case Mode::sup_pose: return "sup-pose";
    case Mode::random: return "random";
    }
    return "?";
}

Mode parse_mode(const std::string& name) {
    for (auto m : kAllModes) {
        if (to_string(m) == name) return m;
    }
    throw ConfigError("unknown pretrain mode '" + name + "' (expected cttp, recon, sup-class, sup-pose or random)");
}

void validate(const PretrainConfig& config) {
    if (config.batch_size < 1) throw ConfigError("pretrain.batch_size must be at least 1");
    if (config.mode == Mode::cttp && config.batch_size < 2) {
        throw ConfigError("pretrain.batch_size must be at least 2 for cttp (in-batch negatives)");
    }
    if (!(config.lr > 0.0)) throw ConfigError("pretrain.lr must be positive");
    if (!(config.contrastive.tau > 0.0)) throw ConfigError("pretrain.tau must be positive");
}

std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch) { return derive_seed(seed, "train-shuffle", epoch); }

std::vector<std::vector<std::size_t>> batch_indices(std::size_t n, std::size_t batch_size, std::uint64_t seed) {
    if (batch_size == 0) throw ConfigError("batch size must be positive");
    if (n < batch_size) {
        throw DataError("split has " + std::to_string(n) + " records, fewer than one batch of " +
                        std::to_string(batch_size));
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order.begin(), order.end());
    std::vector<std::vector<std::size_t>> out(n / batch_size);
    for (std::size_t b = 0; b < out.size(); ++b) {
        out[b].assign(order.begin() + b * batch_size, order.begin() + (b + 1) * batch_size);
    }
    return out;
}

BatchPairs make_batch(std::span<const sim::PairedRecord> records, std::vector<std::size_t> indices) {
    BatchPairs b;
    b.gel = model::stack_frames(records, indices, SensorKind::gel);
    b.membrane = model::stack_frames(records, indices, SensorKind::membrane);
    b.grasps.reserve(indices.size());
    for (auto i : indices) b.grasps.push_back(records[i].grasp);
    b.indices = std::move(indices);
    return b;
}

std::vector<BatchPairs> build_batches(std::span<const sim::PairedRecord> records, std::size_t batch_size,
                                      std::uint64_t seed) {
    std::vector<BatchPairs> out;
    for (auto& idx : batch_indices(records.size(), batch_size, seed)) out.push_back(make_batch(records, idx));
    return out;
}

std::vector<std::uint32_t> class_tool_ids(std::span<const sim::PairedRecord> records) {
    std::vector<std::uint32_t> ids;
    for (const auto& r : records) ids.push_back(r.grasp.tool_id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

namespace {

using Loss = std::function<ad::Tensor<float>(const BatchPairs&)>;

void train_loop(PretrainResult& result, std::span<const sim::PairedRecord> records, ad::ParamList<float> params,
                const Loss& loss_fn, const EpochCallback& on_epoch) {
    const auto& config = result.config;
    for (auto& p : params) p.tensor.set_requires_grad(true);
    auto state = ad::make_adam_state(params, {.lr = config.lr});
    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        double sum = 0.0;
        const auto batches = batch_indices(records.size(), config.batch_size, epoch_seed(config.seed, epoch));
        for (const auto& idx : batches) {
            const auto batch = make_batch(records, idx);
            ad::Tape<float> tape;
            auto loss = loss_fn(batch);
            const double value = loss.item();
            if (!std::isfinite(value)) {
                throw NumericError(to_string(config.mode) + " pretraining: non-finite loss at step " +
                                   std::to_string(step));
            }
            if (step == 0) result.initial_loss = value;
            tape.backward(loss);
            ad::adam_step(params, state);
            ad::zero_grads(params);
            result.step_losses.push_back(value);
            sum += value;
            ++step;
        }
        result.epoch_losses.push_back(sum / double(batches.size()));
        if (on_epoch) on_epoch(epoch + 1, result);
    }
    for (auto& p : params) p.tensor.set_requires_grad(false);
}

ad::ParamList<float> tower_encoders(const model::DualEncoder<float>& enc) {
    auto out = enc.encoder_parameters(SensorKind::gel);
    auto mem = enc.encoder_parameters(SensorKind::membrane);
    out.insert(out.end(), mem.begin(), mem.end());
    return out;
}

} // namespace

PretrainResult pretrain_cttp(const PretrainConfig& config, std::span<const sim::PairedRecord> records,
                             const EpochCallback& on_epoch) {
    if (config.mode != Mode::cttp) throw ConfigError("pretrain_cttp called with mode " + to_string(config.mode));
    validate(config);
    PretrainResult result{config, model::DualEncoder<float>::init(config.arch, config.seed), {}, {}, 0.0};
    if (config.tie_towers) result.encoder.tie_towers();
    const auto& enc = result.encoder;
    Loss loss = [&](const BatchPairs& b) {
        auto z_gel = enc.gel.projection(enc.gel.encoder(b.gel));
        auto z_mem = enc.membrane.projection(enc.membrane.encoder(b.membrane));
        return model::infonce_loss(z_gel, z_mem, config.contrastive);
    };
    train_loop(result, records, enc.unique_parameters(), loss, on_epoch);
    return result;
}

PretrainResult pretrain_baseline(const PretrainConfig& config, std::span<const sim::PairedRecord> records,
                                 const EpochCallback& on_epoch) {
    if (config.mode == Mode::cttp) throw ConfigError("pretrain_baseline does not train cttp");
    validate(config);
    PretrainResult result{config, model::DualEncoder<float>::init(config.arch, config.seed), {}, {}, 0.0};
    if (config.mode == Mode::random) {
        if (on_epoch) on_epoch(0, result);
        return result;
    }
    const auto& enc = result.encoder;
    const std::size_t db = config.arch.backbone_dim;
    Rng rng = Rng::stream(config.seed, "init-head");
    auto params = tower_encoders(enc);
    Loss loss;

    if (config.mode == Mode::recon) {
        const std::size_t px = config.arch.frame_size * config.arch.frame_size;
        auto gel_head = model::ReconHead<float>::init(db, sensor_channels(SensorKind::gel) * px, rng);
        auto mem_head = model::ReconHead<float>::init(db, sensor_channels(SensorKind::membrane) * px, rng);
        gel_head.collect("head.gel", params);
        mem_head.collect("head.membrane", params);
        loss = [&enc, gel_head, mem_head](const BatchPairs& b) {
            auto lg = model::recon_loss(gel_head(enc.gel.encoder(b.gel)), b.gel);
            auto lm = model::recon_loss(mem_head(enc.membrane.encoder(b.membrane)), b.membrane);
            return ad::add(lg, lm);
        };
    } else if (config.mode == Mode::sup_class) {
        const auto tools = class_tool_ids(records);
        auto gel_head = model::ClassifierHead<float>::init(db, tools.size(), rng);
        auto mem_head = model::ClassifierHead<float>::init(db, tools.size(), rng);
        gel_head.collect("head.gel", params);
        mem_head.collect("head.membrane", params);
        loss = [&enc, gel_head, mem_head, tools](const BatchPairs& b) {
            std::vector<int> labels;
            for (const auto& g : b.grasps) {
                labels.push_back(int(std::lower_bound(tools.begin(), tools.end(), g.tool_id) - tools.begin()));
            }
            auto lg = model::ce_loss(gel_head(enc.gel.encoder(b.gel)), std::span<const int>(labels));
            auto lm = model::ce_loss(mem_head(enc.membrane.encoder(b.membrane)), std::span<const int>(labels));
            return ad::add(lg, lm);
        };
    } else {
        auto gel_head = model::PoseHead<float>::init(db, rng);
        auto mem_head = model::PoseHead<float>::init(db, rng);
        gel_head.collect("head.gel", params);
        mem_head.collect("head.membrane", params);
        loss = [&enc, gel_head, mem_head](const BatchPairs& b) {
            auto targets = model::pose_targets<float>(b.grasps);
            auto lg = model::pose_loss(gel_head(enc.gel.encoder(b.gel)), targets);
            auto lm = model::pose_loss(mem_head(enc.membrane.encoder(b.membrane)), targets);
            return ad::add(lg, lm);
        };
    }
    train_loop(result, records, params, loss, on_epoch);
    return result;
}

PretrainResult run_pretrain(const PretrainConfig& config, std::span<const sim::PairedRecord> records,
                            const EpochCallback& on_epoch) {
    return config.mode == Mode::cttp ? pretrain_cttp(config, records, on_epoch)
                                     : pretrain_baseline(config, records, on_epoch);
}

nlohmann::json config_to_json(const PretrainConfig& c) {
    return {{"mode", to_string(c.mode)},
            {"batch_size", c.batch_size},
            {"epochs", c.epochs},
            {"lr", c.lr},
            {"tau", c.contrastive.tau},
            {"symmetric", c.contrastive.symmetric},
            {"seed", c.seed},
            {"backbone_dim", c.arch.backbone_dim},
            {"projection_hidden", c.arch.projection_hidden},
            {"latent_dim", c.arch.latent_dim},
            {"tie_towers", c.tie_towers}};
}

nlohmann::json loss_trace_json(const PretrainResult& r) {
    return {{"config", config_to_json(r.config)},
            {"steps", r.step_losses.size()},
            {"step_loss", r.step_losses},
            {"epoch_loss", r.epoch_losses}};
}

} // namespace cttp::pretrain
