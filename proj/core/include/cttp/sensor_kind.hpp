#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace cttp {

// gel: 3-channel photometric image. membrane: 1-channel depth map (mm).
enum class SensorKind { gel, membrane };

constexpr std::size_t sensor_channels(SensorKind kind) {
    return kind == SensorKind::gel ? 3 : 1;
}

constexpr SensorKind other_sensor(SensorKind kind) {
    return kind == SensorKind::gel ? SensorKind::membrane : SensorKind::gel;
}

std::string to_string(SensorKind kind);
SensorKind parse_sensor(std::string_view text); // throws ConfigError

} // namespace cttp
