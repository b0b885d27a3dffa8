#include "cttp/eval/probes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cttp/autodiff/adam.hpp"
#include "cttp/autodiff/tape.hpp"
#include "cttp/error.hpp"
#include "cttp/model/losses.hpp"

namespace cttp::eval {

FeatureSet extract_features(const model::DualEncoder<float>& encoder, std::span<const sim::PairedRecord> records,
                            SensorKind kind, FeatureKind which, std::size_t batch) {
    const auto& tower = encoder.tower(kind);
    if (tower.sensor() != kind) throw ShapeError("extract_features: tower/sensor mismatch");
    FeatureSet out;
    out.sensor = kind;
    out.dim = which == FeatureKind::backbone ? encoder.arch.backbone_dim : encoder.arch.latent_dim;
    out.values.reserve(records.size() * out.dim);
    ad::NoGradGuard<float> guard;
    for (std::size_t start = 0; start < records.size(); start += batch) {
        const std::size_t n = std::min(batch, records.size() - start);
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), start);
        auto frames = model::stack_frames(records, idx, kind);
        auto feats = tower.encoder(frames);
        if (which == FeatureKind::projected) feats = tower.projection(feats);
        out.values.insert(out.values.end(), feats.data().begin(), feats.data().end());
    }
    for (const auto& r : records) out.grasps.push_back(r.grasp);
    return out;
}

Standardizer Standardizer::fit(const FeatureSet& f) {
    if (f.count() == 0) throw DataError("cannot standardize an empty feature set");
    Standardizer s;
    s.mean.assign(f.dim, 0.0f);
    s.inv_std.assign(f.dim, 1.0f);
    for (std::size_t d = 0; d < f.dim; ++d) {
        double sum = 0.0, ss = 0.0;
        for (std::size_t i = 0; i < f.count(); ++i) sum += f.values[i * f.dim + d];
        const double mean = sum / double(f.count());
        for (std::size_t i = 0; i < f.count(); ++i) {
            const double c = f.values[i * f.dim + d] - mean;
            ss += c * c;
        }
        const double sd = std::sqrt(ss / double(f.count()));
        s.mean[d] = float(mean);
        s.inv_std[d] = sd > 1e-8 ? float(1.0 / sd) : 1.0f;
    }
    return s;
}

Standardizer Standardizer::identity(std::size_t dim) {
    return {std::vector<float>(dim, 0.0f), std::vector<float>(dim, 1.0f)};
}

ad::Tensor<float> Standardizer::apply(const FeatureSet& f) const {
    if (f.dim != mean.size()) {
        throw ShapeError("standardizer fitted on dim " + std::to_string(mean.size()) + ", got " +
                         std::to_string(f.dim));
    }
    ad::Tensor<float> out({f.count(), f.dim});
    for (std::size_t i = 0; i < f.count(); ++i) {
        for (std::size_t d = 0; d < f.dim; ++d) {
            out[i * f.dim + d] = (f.values[i * f.dim + d] - mean[d]) * inv_std[d];
        }
    }
    return out;
}

FeatureExtractor FeatureExtractor::fit(const model::DualEncoder<float>& encoder,
                                       std::span<const sim::PairedRecord> reference, FeatureKind which) {
    FeatureExtractor fx{&encoder, which, {}, {}};
    fx.gel_norm = Standardizer::fit(extract_features(encoder, reference, SensorKind::gel, which));
    fx.membrane_norm = Standardizer::fit(extract_features(encoder, reference, SensorKind::membrane, which));
    return fx;
}

FeatureExtractor FeatureExtractor::raw(const model::DualEncoder<float>& encoder, FeatureKind which) {
    const std::size_t dim = which == FeatureKind::backbone ? encoder.arch.backbone_dim : encoder.arch.latent_dim;
    return {&encoder, which, Standardizer::identity(dim), Standardizer::identity(dim)};
}

FeatureSet FeatureExtractor::operator()(std::span<const sim::PairedRecord> records, SensorKind kind) const {
    if (!encoder) throw DataError("feature extractor has no encoder");
    auto f = extract_features(*encoder, records, kind, which);
    const auto x = (kind == SensorKind::gel ? gel_norm : membrane_norm).apply(f);
    std::copy(x.data().begin(), x.data().end(), f.values.begin());
    return f;
}

namespace {

ad::Tensor<float> gather_rows(const ad::Tensor<float>& x, std::span<const std::size_t> rows) {
    const std::size_t d = x.numel() / x.dim(0);
    ad::Tensor<float> out({rows.size(), d});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::copy_n(x.raw() + rows[i] * d, d, out.raw() + i * d);
    }
    return out;
}

// Epoch loop shared by both probes. loss(x_rows, rows) builds the loss of a
// minibatch from the gathered inputs and the original row indices.
template <class LossFn>
void fit_probe(const ad::Tensor<float>& x, ad::ParamList<float> params, const ProbeConfig& cfg, std::size_t epochs,
               const char* stream, LossFn&& loss) {
    const std::size_t n = x.dim(0);
    const std::size_t bs = cfg.batch_size == 0 ? n : std::min(cfg.batch_size, n);
    for (auto& p : params) p.tensor.set_requires_grad(true);
    auto state = ad::make_adam_state(params, {.lr = cfg.lr});
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        if (bs < n) {
            std::iota(order.begin(), order.end(), 0);
            Rng::stream(cfg.seed, stream, epoch).shuffle(order.begin(), order.end());
        }
        for (std::size_t start = 0; start < n; start += bs) {
            std::span<const std::size_t> rows(order.data() + start, std::min(bs, n - start));
            ad::Tensor<float> xb = bs < n ? gather_rows(x, rows) : x;
            ad::Tape<float> tape;
            auto l = loss(xb, rows);
            if (!std::isfinite(l.item())) throw NumericError(std::string(stream) + ": non-finite probe loss");
            tape.backward(l);
            ad::adam_step(params, state);
            ad::zero_grads(params);
        }
    }
    for (auto& p : params) p.tensor.set_requires_grad(false);
}

} // namespace

std::vector<std::uint32_t> ClassProbe::predict(const FeatureSet& f) const {
    ad::NoGradGuard<float> guard;
    const auto pred = model::argmax_rows(head(standardizer.apply(f)));
    std::vector<std::uint32_t> out;
    out.reserve(pred.size());
    for (int c : pred) out.push_back(tools[std::size_t(c)]);
    return out;
}

std::vector<std::array<double, 3>> PoseProbe::predict(const FeatureSet& f) const {
    ad::NoGradGuard<float> guard;
    const auto y = head(standardizer.apply(f));
    std::vector<std::array<double, 3>> out(f.count());
    for (std::size_t i = 0; i < f.count(); ++i) {
        out[i] = {double(y[3 * i]), double(y[3 * i + 1]), double(y[3 * i + 2]) * model::kThetaScale};
    }
    return out;
}

ClassProbe train_class_probe(const FeatureSet& train, const ProbeConfig& cfg) {
    if (train.count() == 0) throw DataError("class probe: empty training set");
    ClassProbe probe;
    probe.trained_on = train.sensor;
    for (const auto& g : train.grasps) probe.tools.push_back(g.tool_id);
    std::sort(probe.tools.begin(), probe.tools.end());
    probe.tools.erase(std::unique(probe.tools.begin(), probe.tools.end()), probe.tools.end());
    probe.standardizer = cfg.standardize ? Standardizer::fit(train) : Standardizer::identity(train.dim);

    std::vector<int> labels;
    for (const auto& g : train.grasps) {
        labels.push_back(int(std::lower_bound(probe.tools.begin(), probe.tools.end(), g.tool_id) - probe.tools.begin()));
    }
    Rng rng = Rng::stream(cfg.seed, "probe-class-init");
    probe.head = model::ClassifierHead<float>::init(train.dim, probe.tools.size(), rng);
    ad::ParamList<float> params;
    probe.head.collect("class", params);
    const auto x = probe.standardizer.apply(train);
    const auto& head = probe.head;
    fit_probe(x, params, cfg, cfg.class_epochs, "probe-class-shuffle",
              [&](const ad::Tensor<float>& xb, std::span<const std::size_t> rows) {
                  std::vector<int> yb;
                  yb.reserve(rows.size());
                  for (auto r : rows) yb.push_back(labels[r]);
                  return model::ce_loss(head(xb), std::span<const int>(yb));
              });
    probe.train_accuracy = evaluate_class_probe(probe, train).top1;
    return probe;
}

PoseProbe train_pose_probe(const FeatureSet& train, const ProbeConfig& cfg) {
    if (train.count() == 0) throw DataError("pose probe: empty training set");
    PoseProbe probe;
    probe.trained_on = train.sensor;
    probe.standardizer = cfg.standardize ? Standardizer::fit(train) : Standardizer::identity(train.dim);
    Rng rng = Rng::stream(cfg.seed, "probe-pose-init");
    probe.head = model::PoseHead<float>::init(train.dim, rng);
    ad::ParamList<float> params;
    probe.head.collect("pose", params);
    const auto x = probe.standardizer.apply(train);
    const auto targets = model::pose_targets<float>(train.grasps);
    const auto& head = probe.head;
    fit_probe(x, params, cfg, cfg.pose_epochs, "probe-pose-shuffle",
              [&](const ad::Tensor<float>& xb, std::span<const std::size_t> rows) {
                  auto tb = rows.size() < train.count() ? gather_rows(targets, rows) : targets;
                  return model::pose_loss(head(xb), tb);
              });
    ad::NoGradGuard<float> guard;
    probe.train_mse = model::pose_loss(head(x), targets).item();
    return probe;
}

ClassResult evaluate_class_probe(const ClassProbe& probe, const FeatureSet& test) {
    if (test.count() == 0) throw DataError("class probe: empty test set");
    const auto pred = probe.predict(test);
    ClassResult r;
    r.total = test.count();
    r.classes = probe.tools.size();
    for (std::size_t i = 0; i < pred.size(); ++i) r.correct += pred[i] == test.grasps[i].tool_id;
    r.top1 = double(r.correct) / double(r.total);
    return r;
}

PoseErrorSummary summarize_pose_errors(std::span<const std::array<double, 3>> predicted,
                                       std::span<const sim::GraspSample> truth, double translation_tol,
                                       double rotation_tol) {
    if (predicted.size() != truth.size()) throw ShapeError("pose summary: prediction/truth count mismatch");
    if (truth.empty()) throw DataError("pose summary: no predictions");
    PoseErrorSummary s;
    s.translation_tol = translation_tol;
    s.rotation_tol = rotation_tol;
    s.count = truth.size();
    std::vector<double> ey, ez, et;
    std::size_t t_ok = 0, r_ok = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const std::array<double, 3> e{predicted[i][0] - truth[i].y, predicted[i][1] - truth[i].z,
                                      predicted[i][2] - truth[i].theta};
        s.errors.push_back(e);
        ey.push_back(e[0]);
        ez.push_back(e[1]);
        et.push_back(e[2]);
        t_ok += std::abs(e[0]) <= translation_tol && std::abs(e[1]) <= translation_tol;
        r_ok += std::abs(e[2]) <= rotation_tol;
    }
    s.y = io::mean_std(ey);
    s.z = io::mean_std(ez);
    s.theta = io::mean_std(et);
    s.within_translation = double(t_ok) / double(s.count);
    s.within_rotation = double(r_ok) / double(s.count);
    return s;
}

PoseErrorSummary evaluate_pose_probe(const PoseProbe& probe, const FeatureSet& test) {
    const auto pred = probe.predict(test);
    return summarize_pose_errors(pred, test.grasps);
}

} // namespace cttp::eval
