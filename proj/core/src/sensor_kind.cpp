#include "cttp/sensor_kind.hpp"

#include "cttp/error.hpp"

namespace cttp {

std::string to_string(SensorKind kind) {
    return kind == SensorKind::gel ? "gel" : "membrane";
}

SensorKind parse_sensor(std::string_view text) {
    if (text == "gel") return SensorKind::gel;
    if (text == "membrane") return SensorKind::membrane;
    throw ConfigError("unknown sensor '" + std::string(text) + "' (expected gel or membrane)");
}

} // namespace cttp
