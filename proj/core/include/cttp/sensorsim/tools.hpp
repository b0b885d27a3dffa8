#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cttp/sensorsim/sdf.hpp"

namespace cttp::sim {

struct ToolShape {
    std::uint32_t id = 0;
    std::string name;
    Sdf sdf;
};

/// Twelve tool cross-sections. Ids 0-8 are pretraining tools, 9-11 are
/// held out (L, T, star). Every tool lacks rotational symmetry within the
/// +-30 degree grasp range so orientation stays observable.
const std::vector<ToolShape>& tool_library();
const ToolShape& tool_by_id(std::uint32_t id);

std::vector<std::uint32_t> seen_tool_ids();   // 0..8
std::vector<std::uint32_t> unseen_tool_ids(); // 9..11

} // namespace cttp::sim
