#include <benchmark/benchmark.h>

#include "cttp/autodiff/adam.hpp"
#include "cttp/autodiff/rng.hpp"
#include "cttp/autodiff/tape.hpp"
#include "cttp/eval/projection.hpp"
#include "cttp/model/encoder.hpp"
#include "cttp/model/losses.hpp"
#include "cttp/sensorsim/dataset.hpp"

using namespace cttp;

namespace {

ad::Tensor<float> random_tensor(ad::Shape shape, std::uint64_t seed) {
    Rng rng(seed);
    ad::Tensor<float> t(std::move(shape));
    for (auto& v : t.data()) v = float(rng.normal(0, 1));
    return t;
}

void BM_Matmul(benchmark::State& state) {
    const auto n = std::size_t(state.range(0));
    const auto a = random_tensor({n, n}, 1), b = random_tensor({n, n}, 2);
    ad::NoGradGuard<float> guard;
    for (auto _ : state) benchmark::DoNotOptimize(ad::matmul(a, b));
    state.SetItemsProcessed(state.iterations() * 2 * n * n * n);
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(128)->Arg(256);

void BM_Conv2dForward(benchmark::State& state) {
    const auto x = random_tensor({16, 16, 16, 16}, 1);
    const auto w = random_tensor({32, 16, 3, 3}, 2), b = random_tensor({32}, 3);
    ad::NoGradGuard<float> guard;
    for (auto _ : state) benchmark::DoNotOptimize(ad::conv2d(x, w, b, {2, 1}));
}
BENCHMARK(BM_Conv2dForward);

void BM_EncoderForward(benchmark::State& state) {
    const auto enc = model::DualEncoder<float>::init({}, 1);
    const auto frames = random_tensor({std::size_t(state.range(0)), 1, 32, 32}, 4);
    ad::NoGradGuard<float> guard;
    for (auto _ : state) benchmark::DoNotOptimize(enc.membrane.projection(enc.membrane.encoder(frames)));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EncoderForward)->Arg(16)->Arg(128);

// One optimizer-free training step of the contrastive objective: both
// towers forward, InfoNCE, backward.
void BM_CttpStep(benchmark::State& state) {
    const auto n = std::size_t(state.range(0));
    auto enc = model::DualEncoder<float>::init({}, 1);
    enc.tie_towers();
    auto params = enc.unique_parameters();
    for (auto& p : params) p.tensor.set_requires_grad(true);
    const auto gel = random_tensor({n, 3, 32, 32}, 5), mem = random_tensor({n, 1, 32, 32}, 6);
    for (auto _ : state) {
        ad::Tape<float> tape;
        auto loss = model::infonce_loss(enc.gel.projection(enc.gel.encoder(gel)),
                                        enc.membrane.projection(enc.membrane.encoder(mem)), {});
        tape.backward(loss);
        ad::zero_grads(params);
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_CttpStep)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_InfoNce(benchmark::State& state) {
    const auto n = std::size_t(state.range(0));
    const auto a = random_tensor({n, 64}, 7), b = random_tensor({n, 64}, 8);
    ad::NoGradGuard<float> guard;
    for (auto _ : state) benchmark::DoNotOptimize(model::infonce_loss(a, b, {}));
}
BENCHMARK(BM_InfoNce)->Arg(128)->Arg(256);

void BM_RenderRecord(benchmark::State& state) {
    const sim::DatasetConfig cfg;
    const sim::GraspSample g{3, 0, 1.0f, -2.0f, 12.0f, 1.2f};
    for (auto _ : state) benchmark::DoNotOptimize(sim::render_record(g, cfg));
}
BENCHMARK(BM_RenderRecord);

void BM_Tsne(benchmark::State& state) {
    Rng rng(9);
    eval::PointCloud pc{std::size_t(state.range(0)), 32, {}};
    for (std::size_t i = 0; i < pc.n * pc.dim; ++i) pc.values.push_back(rng.normal(0, 1));
    eval::TsneConfig cfg;
    cfg.iterations = 100;
    cfg.exaggeration_iters = 50;
    for (auto _ : state) benchmark::DoNotOptimize(eval::tsne_2d(pc, cfg));
}
BENCHMARK(BM_Tsne)->Arg(200)->Arg(500)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
