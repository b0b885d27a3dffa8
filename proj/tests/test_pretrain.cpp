#include <cmath>
#include <gtest/gtest.h>
#include <set>

#include "cttp/pretrain/pretrain.hpp"
#include "cttp/sensorsim/dataset.hpp"

using namespace cttp;
using pretrain::Mode;

namespace {

const sim::Dataset& small_dataset() {
    static const sim::Dataset ds = [] {
        sim::DatasetConfig cfg;
        cfg.pretrain_per_tool = 4;
        cfg.probe_train_per_tool = cfg.probe_test_per_tool = 1;
        cfg.unseen_train_per_tool = cfg.unseen_test_per_tool = 1;
        return sim::generate_dataset(cfg);
    }();
    return ds;
}

pretrain::PretrainConfig small_config(Mode mode) {
    pretrain::PretrainConfig c;
    c.mode = mode;
    c.batch_size = 16;
    c.epochs = 1;
    c.arch = {16, 8, 8};
    c.seed = 21;
    return c;
}

bool same_values(const ad::ParamList<float>& a, const ad::ParamList<float>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].name != b[i].name) return false;
        const auto x = a[i].tensor.data(), y = b[i].tensor.data();
        if (!std::equal(x.begin(), x.end(), y.begin(), y.end())) return false;
    }
    return true;
}

bool tensor_equal(const ad::Tensor<float>& a, const ad::Tensor<float>& b) {
    return std::equal(a.data().begin(), a.data().end(), b.data().begin(), b.data().end());
}

} // namespace

TEST(Batching, DefaultPretrainSplitGivesFourteenFullBatches) {
    const auto batches = pretrain::batch_indices(1800, 128, pretrain::epoch_seed(1, 0));
    ASSERT_EQ(batches.size(), 14u); // 1800 = 14 * 128 + 8, remainder dropped
    std::set<std::size_t> seen;
    for (const auto& b : batches) {
        ASSERT_EQ(b.size(), 128u);
        for (auto i : b) {
            EXPECT_LT(i, 1800u);
            EXPECT_TRUE(seen.insert(i).second) << "index " << i << " repeated";
        }
    }
    EXPECT_EQ(seen.size(), 1792u);
}

TEST(Batching, PartitionPropertyOverRandomSizes) {
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t bs = 1 + rng.next() % 40, n = bs + rng.next() % 200;
        const auto batches = pretrain::batch_indices(n, bs, rng.next());
        ASSERT_EQ(batches.size(), n / bs);
        std::set<std::size_t> seen;
        for (const auto& b : batches) {
            ASSERT_EQ(b.size(), bs);
            for (auto i : b) ASSERT_TRUE(i < n && seen.insert(i).second);
        }
    }
}

TEST(Batching, SeededAndEpochDependent) {
    const auto a = pretrain::batch_indices(100, 10, pretrain::epoch_seed(5, 0));
    EXPECT_EQ(a, pretrain::batch_indices(100, 10, pretrain::epoch_seed(5, 0)));
    EXPECT_NE(a, pretrain::batch_indices(100, 10, pretrain::epoch_seed(5, 1)));
    EXPECT_THROW(pretrain::batch_indices(9, 10, 0), DataError);
    EXPECT_THROW(pretrain::batch_indices(9, 0, 0), ConfigError);
}

TEST(Batching, RowsArePairedByRecord) {
    const auto& recs = small_dataset().split("pretrain");
    const auto b = pretrain::make_batch(recs, {7, 2, 30});
    ASSERT_EQ(b.gel.shape(), (ad::Shape{3, 3, 32, 32}));
    ASSERT_EQ(b.membrane.shape(), (ad::Shape{3, 1, 32, 32}));
    for (std::size_t r = 0; r < 3; ++r) {
        EXPECT_EQ(b.grasps[r].grasp_id, recs[b.indices[r]].grasp.grasp_id);
        EXPECT_EQ(b.membrane[r * 1024 + 100], recs[b.indices[r]].membrane.data[100]);
        EXPECT_EQ(b.gel[r * 3072 + 2000], recs[b.indices[r]].gel.data[2000]);
    }
}

TEST(Config, ModesAndValidation) {
    for (auto m : pretrain::kAllModes) EXPECT_EQ(pretrain::parse_mode(pretrain::to_string(m)), m);
    EXPECT_THROW(pretrain::parse_mode("simclr"), ConfigError);
    auto c = small_config(Mode::cttp);
    c.batch_size = 1;
    EXPECT_THROW(pretrain::validate(c), ConfigError);
    c = small_config(Mode::cttp);
    c.lr = 0;
    EXPECT_THROW(pretrain::validate(c), ConfigError);
    c = small_config(Mode::cttp);
    c.contrastive.tau = -1;
    EXPECT_THROW(pretrain::validate(c), ConfigError);
}

TEST(Cttp, InitialLossIsNearLogBatchSize) {
    const auto r = pretrain::pretrain_cttp(small_config(Mode::cttp), small_dataset().split("pretrain"));
    const double ln_n = std::log(16.0);
    EXPECT_NEAR(r.initial_loss, ln_n, 0.15 * ln_n);
    EXPECT_EQ(r.step_losses.size(), 2u); // 36 records, batch 16
    EXPECT_EQ(r.step_losses.front(), r.initial_loss);
}

TEST(Cttp, DeterministicForFixedSeed) {
    const auto& recs = small_dataset().split("pretrain");
    auto c = small_config(Mode::cttp);
    c.epochs = 2;
    const auto a = pretrain::pretrain_cttp(c, recs), b = pretrain::pretrain_cttp(c, recs);
    EXPECT_EQ(a.step_losses, b.step_losses);
    EXPECT_TRUE(same_values(a.encoder.parameters(), b.encoder.parameters()));
    c.seed = 22;
    const auto other = pretrain::pretrain_cttp(c, recs);
    EXPECT_FALSE(same_values(a.encoder.parameters(), other.encoder.parameters()));
}

TEST(Cttp, LossFallsOnASmallSplit) {
    auto c = small_config(Mode::cttp);
    c.epochs = 15;
    c.lr = 3e-3;
    std::vector<std::size_t> epochs_seen;
    const auto r = pretrain::pretrain_cttp(c, small_dataset().split("pretrain"),
                                           [&](std::size_t e, const pretrain::PretrainResult&) { epochs_seen.push_back(e); });
    ASSERT_EQ(r.epoch_losses.size(), 15u);
    EXPECT_LT(r.epoch_losses.back(), 0.8 * r.epoch_losses.front());
    EXPECT_EQ(epochs_seen.front(), 1u);
    EXPECT_EQ(epochs_seen.back(), 15u);
    EXPECT_TRUE(r.encoder.towers_tied());
}

TEST(Baselines, RandomIsTheUntrainedInit) {
    const auto c = small_config(Mode::random);
    const auto r = pretrain::run_pretrain(c, small_dataset().split("pretrain"));
    EXPECT_TRUE(r.step_losses.empty());
    EXPECT_TRUE(same_values(r.encoder.parameters(), model::DualEncoder<float>::init(c.arch, c.seed).parameters()));
}

TEST(Baselines, OnlyEncodersMove) {
    // Baselines train encoders through their own heads; the projection head
    // is never touched and the towers stay independent.
    for (auto mode : {Mode::recon, Mode::sup_class, Mode::sup_pose}) {
        const auto c = small_config(mode);
        const auto init = model::DualEncoder<float>::init(c.arch, c.seed);
        const auto r = pretrain::run_pretrain(c, small_dataset().split("pretrain"));
        EXPECT_FALSE(r.encoder.towers_tied());
        EXPECT_TRUE(std::isfinite(r.initial_loss));
        for (auto kind : {SensorKind::gel, SensorKind::membrane}) {
            const auto& t0 = init.tower(kind);
            const auto& t1 = r.encoder.tower(kind);
            EXPECT_TRUE(tensor_equal(t0.projection.out.weight, t1.projection.out.weight)) << pretrain::to_string(mode);
            EXPECT_TRUE(tensor_equal(t0.projection.hidden.weight, t1.projection.hidden.weight));
            EXPECT_FALSE(tensor_equal(t0.encoder.fc.weight, t1.encoder.fc.weight)) << pretrain::to_string(mode);
            EXPECT_FALSE(tensor_equal(t0.encoder.conv1.weight, t1.encoder.conv1.weight));
        }
    }
}

TEST(Baselines, SupClassUsesSeenToolIds) {
    const auto ids = pretrain::class_tool_ids(small_dataset().split("pretrain"));
    EXPECT_EQ(ids.size(), 9u);
    EXPECT_TRUE(std::is_sorted(ids.begin(), ids.end()));
    EXPECT_THROW(pretrain::pretrain_baseline(small_config(Mode::cttp), small_dataset().split("pretrain")), ConfigError);
}

TEST(Trace, JsonHasOneEntryPerStep) {
    auto c = small_config(Mode::cttp);
    const auto r = pretrain::pretrain_cttp(c, small_dataset().split("pretrain"));
    const auto j = pretrain::loss_trace_json(r);
    EXPECT_EQ(j.dump().find("nan"), std::string::npos);
    const auto cfg = pretrain::config_to_json(c);
    EXPECT_EQ(cfg["mode"], "cttp");
    EXPECT_EQ(cfg["batch_size"], 16);
}
