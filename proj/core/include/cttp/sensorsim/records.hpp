#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cttp/sensor_kind.hpp"

namespace cttp::sim {

/// Ground truth for one grasp; drives both renderers and both probes.
struct GraspSample {
    std::uint32_t tool_id = 0;
    std::uint32_t grasp_id = 0;
    float y = 0.0f;     // mm
    float z = 0.0f;     // mm
    float theta = 0.0f; // degrees
    float depth = 0.0f; // mm of indentation

    bool operator==(const GraspSample&) const = default;
};

/// One sensor reading, channel-major [channels][height][width].
struct TactileFrame {
    SensorKind sensor = SensorKind::membrane;
    std::size_t channels = 1;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<float> data;

    float at(std::size_t c, std::size_t row, std::size_t col) const {
        return data[(c * height + row) * width + col];
    }
    bool operator==(const TactileFrame&) const = default;
};

/// Positive pair: both frames rendered from the same grasp.
struct PairedRecord {
    GraspSample grasp;
    TactileFrame gel;
    TactileFrame membrane;

    const TactileFrame& frame(SensorKind kind) const { return kind == SensorKind::gel ? gel : membrane; }
    bool operator==(const PairedRecord&) const = default;
};

} // namespace cttp::sim
