#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cttp/model/layers.hpp"
#include "cttp/sensor_kind.hpp"
#include "cttp/sensorsim/records.hpp"

namespace cttp::model {

struct ArchConfig {
    std::size_t backbone_dim = 128;
    std::size_t projection_hidden = 128;
    std::size_t latent_dim = 64;
    std::size_t frame_size = 32;
};

/// Per-frame amplitude normalization applied to encoder inputs:
/// x' = 2 (x - base) / max|x - base| with base 0.35 for gel and 0 for
/// membrane. Indentation depth only scales a frame, so dividing it out
/// leaves shape, position and orientation. Inputs are data, never
/// differentiated through.
inline constexpr double kGelBase = 0.35;
template <class T>
Tensor<T> normalize_frames(const Tensor<T>& frames, SensorKind kind) {
    if (frames.rank() != 4) throw ShapeError("normalize_frames: expected [N,C,H,W], got " + ad::shape_str(frames.shape()));
    const double base = kind == SensorKind::gel ? kGelBase : 0.0;
    const std::size_t n = frames.dim(0), per = frames.numel() / n;
    Tensor<T> out(frames.shape());
    for (std::size_t i = 0; i < n; ++i) {
        const T* src = frames.raw() + i * per;
        double peak = 0.0;
        for (std::size_t j = 0; j < per; ++j) peak = std::max(peak, std::abs(double(src[j]) - base));
        const double s = 2.0 / std::max(peak, 1e-6);
        for (std::size_t j = 0; j < per; ++j) out.raw()[i * per + j] = T((double(src[j]) - base) * s);
    }
    return out;
}

/// conv(c->16,s2) relu conv(16->32,s2) relu conv(32->64,s2) relu GAP linear(64->D_b)
template <class T>
struct ConvEncoder {
    SensorKind sensor = SensorKind::membrane;
    Conv2d<T> conv1, conv2, conv3;
    Linear<T> fc;

    static constexpr ad::Conv2dOptions kStride2{2, 1};

    static ConvEncoder init(SensorKind kind, const ArchConfig& arch, Rng& rng) {
        ConvEncoder e;
        e.sensor = kind;
        e.conv1 = Conv2d<T>::init(sensor_channels(kind), 16, 3, kStride2, rng);
        e.conv2 = Conv2d<T>::init(16, 32, 3, kStride2, rng);
        e.conv3 = Conv2d<T>::init(32, 64, 3, kStride2, rng);
        e.fc = Linear<T>::init(64, arch.backbone_dim, rng);
        return e;
    }

    /// frames [N, C, H, W] -> backbone features [N, D_b]
    Tensor<T> operator()(const Tensor<T>& frames) const {
        if (frames.rank() != 4 || frames.dim(1) != sensor_channels(sensor)) {
            throw ShapeError(to_string(sensor) + " encoder expects [N, " + std::to_string(sensor_channels(sensor)) +
                             ", H, W] input, got " + ad::shape_str(frames.shape()));
        }
        auto x = ad::relu(conv1(normalize_frames(frames, sensor)));
        x = ad::relu(conv2(x));
        x = ad::relu(conv3(x));
        return fc(ad::global_avg_pool(x));
    }

    void collect(const std::string& prefix, ParamList<T>& out) const {
        conv1.collect(prefix + ".conv1", out);
        conv2.collect(prefix + ".conv2", out);
        conv3.collect(prefix + ".conv3", out);
        fc.collect(prefix + ".fc", out);
    }
    static ConvEncoder load(const ParamList<T>& params, const std::string& prefix, SensorKind kind,
                            const ArchConfig& arch) {
        ConvEncoder e;
        e.sensor = kind;
        e.conv1 = Conv2d<T>::load(params, prefix + ".conv1", sensor_channels(kind), 16, 3, kStride2);
        e.conv2 = Conv2d<T>::load(params, prefix + ".conv2", 16, 32, 3, kStride2);
        e.conv3 = Conv2d<T>::load(params, prefix + ".conv3", 32, 64, 3, kStride2);
        e.fc = Linear<T>::load(params, prefix + ".fc", 64, arch.backbone_dim);
        return e;
    }
    template <class U>
    ConvEncoder<U> cast() const {
        return {sensor, conv1.template cast<U>(), conv2.template cast<U>(), conv3.template cast<U>(),
                fc.template cast<U>()};
    }
};

/// linear(D_b -> hidden) relu linear(hidden -> latent)
template <class T>
struct ProjectionHead {
    Linear<T> hidden;
    Linear<T> out;

    static ProjectionHead init(const ArchConfig& arch, Rng& rng) {
        auto h = Linear<T>::init(arch.backbone_dim, arch.projection_hidden, rng);
        auto o = Linear<T>::init(arch.projection_hidden, arch.latent_dim, rng);
        return {h, o};
    }
    Tensor<T> operator()(const Tensor<T>& backbone) const { return out(ad::relu(hidden(backbone))); }

    void collect(const std::string& prefix, ParamList<T>& params) const {
        hidden.collect(prefix + ".hidden", params);
        out.collect(prefix + ".out", params);
    }
    static ProjectionHead load(const ParamList<T>& params, const std::string& prefix, const ArchConfig& arch) {
        return {Linear<T>::load(params, prefix + ".hidden", arch.backbone_dim, arch.projection_hidden),
                Linear<T>::load(params, prefix + ".out", arch.projection_hidden, arch.latent_dim)};
    }
    template <class U>
    ProjectionHead<U> cast() const {
        return {hidden.template cast<U>(), out.template cast<U>()};
    }
};

template <class T>
struct SensorTower {
    ConvEncoder<T> encoder;
    ProjectionHead<T> projection;

    SensorKind sensor() const { return encoder.sensor; }

    void collect(const std::string& prefix, ParamList<T>& out) const {
        encoder.collect(prefix + ".encoder", out);
        projection.collect(prefix + ".projection", out);
    }
    ParamList<T> parameters(const std::string& prefix) const {
        ParamList<T> out;
        collect(prefix, out);
        return out;
    }
};

/// Per-sensor towers. Parameter names: "<sensor>.encoder.*" and
/// "<sensor>.projection.*".
template <class T>
struct DualEncoder {
    ArchConfig arch;
    SensorTower<T> gel;
    SensorTower<T> membrane;

    static DualEncoder init(const ArchConfig& arch, std::uint64_t seed) {
        Rng rng = Rng::stream(seed, "init");
        DualEncoder d;
        d.arch = arch;
        d.gel.encoder = ConvEncoder<T>::init(SensorKind::gel, arch, rng);
        d.gel.projection = ProjectionHead<T>::init(arch, rng);
        d.membrane.encoder = ConvEncoder<T>::init(SensorKind::membrane, arch, rng);
        d.membrane.projection = ProjectionHead<T>::init(arch, rng);
        return d;
    }

    /// Makes the membrane tower share the gel tower's weights above the
    /// sensor-specific first convolution, projection head included.
    void tie_towers() {
        membrane.encoder.conv2 = gel.encoder.conv2;
        membrane.encoder.conv3 = gel.encoder.conv3;
        membrane.encoder.fc = gel.encoder.fc;
        membrane.projection = gel.projection;
    }
    bool towers_tied() const { return membrane.encoder.fc.weight.id() == gel.encoder.fc.weight.id(); }

    const SensorTower<T>& tower(SensorKind kind) const { return kind == SensorKind::gel ? gel : membrane; }
    SensorTower<T>& tower(SensorKind kind) { return kind == SensorKind::gel ? gel : membrane; }

    ParamList<T> parameters() const {
        ParamList<T> out;
        gel.collect("gel", out);
        membrane.collect("membrane", out);
        return out;
    }
    /// parameters() with aliased tensors listed once (first name wins).
    ParamList<T> unique_parameters() const {
        ParamList<T> out;
        for (auto& p : parameters()) {
            bool seen = false;
            for (const auto& q : out) seen = seen || q.tensor.id() == p.tensor.id();
            if (!seen) out.push_back(p);
        }
        return out;
    }
    ParamList<T> encoder_parameters(SensorKind kind) const {
        ParamList<T> out;
        tower(kind).encoder.collect(to_string(kind) + ".encoder", out);
        return out;
    }

    static DualEncoder from_parameters(const ParamList<T>& params, const ArchConfig& arch = {}) {
        DualEncoder d;
        d.arch = arch;
        for (auto kind : {SensorKind::gel, SensorKind::membrane}) {
            const auto name = to_string(kind);
            auto& t = d.tower(kind);
            t.encoder = ConvEncoder<T>::load(params, name + ".encoder", kind, arch);
            t.projection = ProjectionHead<T>::load(params, name + ".projection", arch);
        }
        return d;
    }
};

/// Widths recovered from the gel tower's parameter shapes; frame_size keeps
/// its default since the convolutions do not fix it.
template <class T>
ArchConfig infer_arch(const ParamList<T>& params) {
    auto shape_of = [&](const std::string& name) {
        for (const auto& p : params) {
            if (p.name == name) return p.tensor.shape();
        }
        throw DataError("missing parameter '" + name + "'");
    };
    ArchConfig arch;
    arch.backbone_dim = shape_of("gel.encoder.fc.weight").at(1);
    arch.projection_hidden = shape_of("gel.projection.hidden.weight").at(1);
    arch.latent_dim = shape_of("gel.projection.out.weight").at(1);
    return arch;
}

/// Stacks the chosen sensor's frames of the given records into [N, C, H, W].
ad::Tensor<float> stack_frames(std::span<const sim::PairedRecord> records, std::span<const std::size_t> indices,
                               SensorKind kind);
ad::Tensor<float> stack_frames(std::span<const sim::PairedRecord> records, SensorKind kind);
ad::Tensor<float> frame_tensor(const sim::TactileFrame& frame);

struct Embedding {
    std::vector<float> backbone;
    std::vector<float> projected;
};

/// Single-frame forward through a tower; the frame's sensor must match.
Embedding encode(const sim::TactileFrame& frame, const SensorTower<float>& tower);

} // namespace cttp::model
