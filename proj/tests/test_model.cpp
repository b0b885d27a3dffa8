#include <cmath>
#include <gtest/gtest.h>

#include "cttp/autodiff/adam.hpp"
#include "cttp/autodiff/rng.hpp"
#include "cttp/autodiff/tape.hpp"
#include "cttp/model/heads.hpp"
#include "cttp/model/encoder.hpp"
#include "cttp/model/losses.hpp"
#include "cttp/sensorsim/dataset.hpp"

using namespace cttp;
using ad::Tensor;

namespace {

Tensor<double> random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
    Tensor<double> t({rows, cols});
    for (auto& v : t.data()) v = rng.normal(0, 1);
    return t;
}

// Direct loops over the definition: cosine similarities over tau, then
// -log softmax of the matching entry per row (and per column).
double infonce_oracle(const Tensor<double>& a, const Tensor<double>& b, double tau, bool symmetric) {
    const std::size_t n = a.dim(0), d = a.dim(1);
    std::vector<double> s(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double dot = 0, na = 0, nb = 0;
            for (std::size_t k = 0; k < d; ++k) {
                dot += a[i * d + k] * b[j * d + k];
                na += a[i * d + k] * a[i * d + k];
                nb += b[j * d + k] * b[j * d + k];
            }
            s[i * n + j] = dot / std::sqrt(na * nb) / tau;
        }
    }
    double rows = 0, cols = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double zr = 0, zc = 0;
        for (std::size_t j = 0; j < n; ++j) {
            zr += std::exp(s[i * n + j]);
            zc += std::exp(s[j * n + i]);
        }
        rows += -(s[i * n + i] - std::log(zr));
        cols += -(s[i * n + i] - std::log(zc));
    }
    return symmetric ? 0.5 * (rows + cols) / n : rows / n;
}

sim::Dataset tiny_dataset() {
    sim::DatasetConfig cfg;
    cfg.pretrain_per_tool = 1;
    cfg.probe_train_per_tool = cfg.probe_test_per_tool = 1;
    cfg.unseen_train_per_tool = cfg.unseen_test_per_tool = 1;
    return sim::generate_dataset(cfg);
}

} // namespace

TEST(InfoNce, MatchesDirectLoopOracle) {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng.next() % 7, d = 1 + rng.next() % 6;
        const auto a = random_matrix(rng, n, d), b = random_matrix(rng, n, d);
        for (bool symmetric : {true, false}) {
            for (double tau : {0.07, 0.5, 1.0}) {
                const auto loss = model::infonce_loss(a, b, {tau, symmetric}).item();
                EXPECT_NEAR(loss, infonce_oracle(a, b, tau, symmetric), 1e-9)
                    << "n=" << n << " d=" << d << " tau=" << tau << " symmetric=" << symmetric;
            }
        }
    }
}

TEST(InfoNce, TwoOrthonormalPairsAtUnitTemperature) {
    // S = I, so each row is -log(e / (e + 1)).
    const Tensor<double> z({2, 2}, {1, 0, 0, 1});
    const double expected = -std::log(std::exp(1.0) / (std::exp(1.0) + 1.0));
    EXPECT_NEAR(model::infonce_loss(z, z, {1.0, true}).item(), expected, 1e-12);
    EXPECT_NEAR(model::infonce_loss(z, z, {1.0, false}).item(), expected, 1e-12);
}

TEST(InfoNce, InvariantToRowScaling) {
    Rng rng(4);
    const auto a = random_matrix(rng, 5, 3), b = random_matrix(rng, 5, 3);
    auto a2 = a.clone();
    for (std::size_t k = 0; k < 3; ++k) a2.data()[k] *= 40.0; // scale row 0
    EXPECT_NEAR(model::infonce_loss(a, b, {}).item(), model::infonce_loss(a2, b, {}).item(), 1e-10);
}

TEST(InfoNce, RejectsMismatchedBatches) {
    Rng rng(4);
    EXPECT_THROW(model::infonce_loss(random_matrix(rng, 3, 2), random_matrix(rng, 4, 2), {}), ShapeError);
}

TEST(Cosine, BasicIdentities) {
    const std::vector<float> a{1, 2, 3}, b{2, 4, 6}, c{-3, 0, 1};
    EXPECT_NEAR(model::cosine_sim(a, b), 1.0, 1e-7);
    EXPECT_NEAR(model::cosine_sim(a, c), 0.0, 1e-7);
    const std::vector<float> zero{0, 0, 0};
    EXPECT_THROW(model::cosine_sim(a, zero), NumericError);
}

TEST(Losses, UniformLogitsGiveLogK) {
    const Tensor<double> logits({3, 7}, 0.25);
    const std::vector<int> labels{0, 3, 6};
    EXPECT_NEAR(model::ce_loss(logits, labels).item(), std::log(7.0), 1e-12);
}

TEST(Losses, ArgmaxTiesGoLow) {
    const Tensor<float> logits({2, 3}, {1, 5, 5, -1, -2, -1});
    EXPECT_EQ(model::argmax_rows(logits), (std::vector<int>{1, 0}));
}

TEST(Losses, PoseTargetsScaleTheta) {
    const std::vector<sim::GraspSample> g{{0, 0, 1.5f, -2.f, 30.f, 1.f}};
    const auto t = model::pose_targets<double>(g);
    ASSERT_EQ(t.shape(), (ad::Shape{1, 3}));
    EXPECT_DOUBLE_EQ(t[0], 1.5);
    EXPECT_DOUBLE_EQ(t[1], -2.0);
    EXPECT_NEAR(t[2], 30.0 / model::kThetaScale, 1e-12);
    EXPECT_NEAR(model::pose_loss(t, t).item(), 0.0, 1e-15);
}

TEST(NormalizeFrames, PeakIsTwoAndAmplitudeCancels) {
    Rng rng(5);
    Tensor<double> f({2, 3, 4, 4});
    for (auto& v : f.data()) v = model::kGelBase + rng.normal(0, 0.05);
    auto louder = f.clone();
    for (auto& v : louder.data()) v = model::kGelBase + 3.0 * (v - model::kGelBase);
    const auto a = model::normalize_frames(f, SensorKind::gel);
    const auto b = model::normalize_frames(louder, SensorKind::gel);
    for (std::size_t i = 0; i < 2; ++i) {
        double peak = 0;
        for (std::size_t j = 0; j < 48; ++j) peak = std::max(peak, std::abs(a[i * 48 + j]));
        EXPECT_NEAR(peak, 2.0, 1e-12);
    }
    for (std::size_t k = 0; k < a.numel(); ++k) EXPECT_NEAR(a[k], b[k], 1e-12);
}

TEST(NormalizeFrames, BlankFrameStaysFinite) {
    const Tensor<float> f({1, 1, 4, 4}, 0.0f);
    const auto out = model::normalize_frames(f, SensorKind::membrane);
    EXPECT_TRUE(out.all_finite());
    for (float v : out.data()) EXPECT_EQ(v, 0.0f);
}

TEST(Encoder, ShapesAndSensorChecks) {
    const model::ArchConfig arch{24, 16, 8};
    const auto enc = model::DualEncoder<float>::init(arch, 3);
    const Tensor<float> gel({2, 3, 32, 32}, 0.4f), mem({2, 1, 32, 32}, 0.1f);
    EXPECT_EQ(enc.gel.encoder(gel).shape(), (ad::Shape{2, 24}));
    EXPECT_EQ(enc.membrane.projection(enc.membrane.encoder(mem)).shape(), (ad::Shape{2, 8}));
    EXPECT_THROW(enc.gel.encoder(mem), ShapeError);
    EXPECT_THROW(enc.membrane.encoder(gel), ShapeError);
}

TEST(Encoder, TiedTowersShareAllButFirstConv) {
    auto enc = model::DualEncoder<float>::init({16, 8, 4}, 3);
    const auto before = enc.unique_parameters().size();
    EXPECT_FALSE(enc.towers_tied());
    enc.tie_towers();
    EXPECT_TRUE(enc.towers_tied());
    EXPECT_NE(enc.gel.encoder.conv1.weight.id(), enc.membrane.encoder.conv1.weight.id());
    // conv2, conv3, fc and both projection layers: 5 weight/bias pairs.
    EXPECT_EQ(before - enc.unique_parameters().size(), 10u);
    EXPECT_EQ(enc.parameters().size(), before);
}

TEST(Encoder, ReloadFromParametersReproducesOutputs) {
    const model::ArchConfig arch{20, 12, 6};
    const auto enc = model::DualEncoder<float>::init(arch, 8);
    const auto params = enc.parameters();
    const auto inferred = model::infer_arch(params);
    EXPECT_EQ(inferred.backbone_dim, 20u);
    EXPECT_EQ(inferred.projection_hidden, 12u);
    EXPECT_EQ(inferred.latent_dim, 6u);
    const auto back = model::DualEncoder<float>::from_parameters(params, inferred);

    const auto ds = tiny_dataset();
    const auto& recs = ds.split("probe-test");
    for (auto kind : {SensorKind::gel, SensorKind::membrane}) {
        const auto frames = model::stack_frames(recs, kind);
        const auto a = enc.tower(kind).encoder(frames), b = back.tower(kind).encoder(frames);
        ASSERT_EQ(a.shape(), b.shape());
        for (std::size_t i = 0; i < a.numel(); ++i) EXPECT_EQ(a[i], b[i]);
    }
}

TEST(Encoder, SingleFrameEncodeMatchesBatch) {
    const auto enc = model::DualEncoder<float>::init({16, 8, 4}, 2);
    const auto ds = tiny_dataset();
    const auto& recs = ds.split("probe-train");
    const auto batch = enc.membrane.encoder(model::stack_frames(recs, SensorKind::membrane));
    for (std::size_t i = 0; i < 3; ++i) {
        const auto e = model::encode(recs[i].membrane, enc.membrane);
        ASSERT_EQ(e.backbone.size(), 16u);
        ASSERT_EQ(e.projected.size(), 4u);
        for (std::size_t k = 0; k < 16; ++k) EXPECT_NEAR(e.backbone[k], batch[i * 16 + k], 1e-5);
    }
}

TEST(InfoNce, RowPermutationLeavesLossUnchanged) {
    Rng rng(15);
    const auto a = random_matrix(rng, 6, 5), b = random_matrix(rng, 6, 5);
    const std::vector<std::size_t> perm{3, 0, 5, 1, 4, 2};
    Tensor<double> pa({6, 5}), pb({6, 5});
    for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t k = 0; k < 5; ++k) {
            pa.data()[i * 5 + k] = a[perm[i] * 5 + k];
            pb.data()[i * 5 + k] = b[perm[i] * 5 + k];
        }
    }
    EXPECT_NEAR(model::infonce_loss(a, b, {}).item(), model::infonce_loss(pa, pb, {}).item(), 1e-10);
}

TEST(InfoNce, StaysWithinLogNPlusMinusTwoOverTau) {
    Rng rng(16);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng.next() % 10;
        const double tau = rng.uniform(0.05, 2.0);
        const auto loss =
            model::infonce_loss(random_matrix(rng, n, 4), random_matrix(rng, n, 4), {tau, false}).item();
        EXPECT_GE(loss, std::log(double(n)) - 2.0 / tau);
        EXPECT_LE(loss, std::log(double(n)) + 2.0 / tau);
    }
}

TEST(InfoNce, SharpTemperatureOnAlignedPairsApproachesZero) {
    const Tensor<double> z({3, 3}, {1, 0, 0, 0.6, 0.8, 0, 0, 0, 1}); // cross similarities < 1
    EXPECT_LT(model::infonce_loss(z, z, {0.01, false}).item(), 1e-3);
    const Tensor<double> one({1, 3}, {1, 0, 0});
    EXPECT_THROW(model::infonce_loss(one, one, {}), ShapeError);
}

TEST(Cosine, ClosedFormAtFortyFiveDegrees) {
    const std::vector<double> a{1, 0}, b{1, 1};
    EXPECT_NEAR(model::cosine_sim(a, b), 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(Losses, CrossEntropyMatchesDirectOracle) {
    Rng rng(17);
    const auto logits = random_matrix(rng, 5, 9);
    const std::vector<int> labels{0, 8, 3, 3, 6};
    double want = 0;
    for (std::size_t i = 0; i < 5; ++i) {
        double z = 0;
        for (std::size_t k = 0; k < 9; ++k) z += std::exp(logits[i * 9 + k]);
        want += -std::log(std::exp(logits[i * 9 + std::size_t(labels[i])]) / z);
    }
    EXPECT_NEAR(model::ce_loss(logits, labels).item(), want / 5, 1e-12);
    const std::vector<int> bad{0, 9, 0, 0, 0};
    EXPECT_THROW(model::ce_loss(logits, bad), ShapeError);
}

TEST(Heads, ZeroClassifierGivesLogNine) {
    model::ClassifierHead<double> head{model::Linear<double>::zeros(12, 9)};
    Rng rng(18);
    const std::vector<int> labels{1, 4};
    EXPECT_NEAR(model::ce_loss(head(random_matrix(rng, 2, 12)), labels).item(), std::log(9.0), 1e-12);
}

TEST(Heads, ArgmaxIgnoresAConstantShift) {
    Rng rng(19);
    const auto logits = random_matrix(rng, 20, 9);
    auto shifted = logits.clone();
    for (auto& v : shifted.data()) v += 123.5;
    EXPECT_EQ(model::argmax_rows(logits), model::argmax_rows(shifted));
}

TEST(Heads, ZeroPoseHeadLossIsMeanSquaredScaledTarget) {
    Rng rng(20);
    const auto head = model::PoseHead<double>{model::Linear<double>::zeros(4, 256), model::Linear<double>::zeros(256, 256),
                                              model::Linear<double>::zeros(256, 3)};
    const std::vector<sim::GraspSample> g{{0, 0, 0.f, 0.f, 30.f, 1.f}};
    // Only theta is nonzero: (30 / 3.75)^2 = 64 over 3 outputs.
    EXPECT_NEAR(model::pose_loss(head(random_matrix(rng, 1, 4)), model::pose_targets<double>(g)).item(), 64.0 / 3.0,
                1e-12);
}

TEST(Heads, PoseHeadOverfitsOneSample) {
    Rng rng(21);
    auto head = model::PoseHead<float>::init(8, rng);
    ad::ParamList<float> params;
    head.collect("pose", params);
    for (auto& p : params) p.tensor.set_requires_grad(true);
    auto state = ad::make_adam_state(params, {.lr = 3e-4});
    Tensor<float> x({1, 8});
    for (auto& v : x.data()) v = float(rng.normal(0, 1));
    const std::vector<sim::GraspSample> g{{0, 0, 2.5f, -1.f, 18.f, 1.f}};
    const auto target = model::pose_targets<float>(g);
    double last = 0;
    for (int step = 0; step < 500; ++step) {
        ad::Tape<float> tape;
        auto loss = model::pose_loss(head(x), target);
        last = loss.item();
        tape.backward(loss);
        ad::adam_step(params, state);
        ad::zero_grads(params);
    }
    EXPECT_LT(last, 1e-3);
}

TEST(Heads, ZeroDecoderReconLossIsMeanSquaredPixel) {
    Rng rng(22);
    Tensor<double> frames({2, 1, 4, 4});
    double want = 0;
    for (auto& v : frames.data()) {
        v = rng.normal(0, 1);
        want += v * v;
    }
    const Tensor<double> pred({2, 16}, 0.0);
    EXPECT_NEAR(model::recon_loss(pred, frames).item(), want / 32, 1e-12);
    Tensor<double> exact({2, 16}, std::vector<double>(frames.data().begin(), frames.data().end()));
    EXPECT_NEAR(model::recon_loss(exact, frames).item(), 0.0, 1e-15);
}
