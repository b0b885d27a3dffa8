#include "cttp/model/encoder.hpp"

#include <algorithm>
#include <numeric>

#include "cttp/autodiff/tape.hpp"

namespace cttp::model {

namespace {

void check_frame(const sim::TactileFrame& f, SensorKind kind, std::size_t c, std::size_t h, std::size_t w) {
    if (f.sensor != kind || f.channels != c || f.height != h || f.width != w || f.data.size() != c * h * w) {
        throw ShapeError("stack_frames: inconsistent " + to_string(kind) + " frame");
    }
}

} // namespace

ad::Tensor<float> stack_frames(std::span<const sim::PairedRecord> records, std::span<const std::size_t> indices,
                               SensorKind kind) {
    if (indices.empty()) throw ShapeError("stack_frames: no records selected");
    const auto& first = records[indices[0]].frame(kind);
    const std::size_t c = first.channels, h = first.height, w = first.width;
    const std::size_t per = c * h * w;
    ad::Tensor<float> out({indices.size(), c, h, w});
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const auto& f = records[indices[i]].frame(kind);
        check_frame(f, kind, c, h, w);
        std::copy(f.data.begin(), f.data.end(), out.raw() + i * per);
    }
    return out;
}

ad::Tensor<float> stack_frames(std::span<const sim::PairedRecord> records, SensorKind kind) {
    std::vector<std::size_t> idx(records.size());
    std::iota(idx.begin(), idx.end(), 0);
    return stack_frames(records, idx, kind);
}

ad::Tensor<float> frame_tensor(const sim::TactileFrame& frame) {
    check_frame(frame, frame.sensor, frame.channels, frame.height, frame.width);
    return ad::Tensor<float>({1, frame.channels, frame.height, frame.width}, frame.data);
}

Embedding encode(const sim::TactileFrame& frame, const SensorTower<float>& tower) {
    if (frame.sensor != tower.sensor() || frame.channels != sensor_channels(tower.sensor())) {
        throw ShapeError("encode: " + to_string(frame.sensor) + " frame with " + std::to_string(frame.channels) +
                         " channels given to the " + to_string(tower.sensor()) + " tower");
    }
    ad::NoGradGuard<float> guard;
    auto backbone = tower.encoder(frame_tensor(frame));
    auto projected = tower.projection(backbone);
    return {std::vector<float>(backbone.data().begin(), backbone.data().end()),
            std::vector<float>(projected.data().begin(), projected.data().end())};
}

} // namespace cttp::model
