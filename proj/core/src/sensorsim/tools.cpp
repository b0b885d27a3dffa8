#include "cttp/sensorsim/tools.hpp"

#include "cttp/error.hpp"

namespace cttp::sim {

namespace {
std::vector<ToolShape> build_library() {
    std::vector<ToolShape> tools;
    auto add = [&](std::string name, Sdf sdf) {
        tools.push_back(ToolShape{static_cast<std::uint32_t>(tools.size()), std::move(name), std::move(sdf)});
    };
    add("keyed-disc", subtract(Sdf::circle(6.5), Sdf::box(4.0, 8.0).translated(6.5, 0.0)));
    add("bar", Sdf::box(7.5, 1.6));
    add("ellipse", Sdf::ellipse(6.5, 4.0));
    add("triangle", Sdf::triangle(7.0));
    add("handled-hexagon", unite(Sdf::hexagon(4.0), Sdf::box(3.5, 1.2).translated(6.0, 0.0)));
    add("capsule", Sdf::capsule(2.5, 2.5));
    add("split-ring", subtract(Sdf::annulus(5.0, 2.4), Sdf::box(3.0, 2.0).translated(5.0, 0.0)));
    add("plus", Sdf::plus_cross(7.5, 1.4));
    add("stadium", Sdf::stadium(3.5, 6.0, 2.0));
    add("l-shape", unite(Sdf::box(6.0, 1.8).translated(0.0, -4.2), Sdf::box(1.8, 6.0).translated(-4.2, 0.0)));
    add("t-shape", unite(Sdf::box(6.5, 1.8).translated(0.0, 4.5), Sdf::box(1.8, 6.0).translated(0.0, -1.5)));
    add("star", Sdf::star5(8.5, 0.35));
    return tools;
}
} // namespace

const std::vector<ToolShape>& tool_library() {
    static const std::vector<ToolShape> tools = build_library();
    return tools;
}

const ToolShape& tool_by_id(std::uint32_t id) {
    const auto& tools = tool_library();
    if (id >= tools.size()) throw DataError("unknown tool id " + std::to_string(id));
    return tools[id];
}

std::vector<std::uint32_t> seen_tool_ids() { return {0, 1, 2, 3, 4, 5, 6, 7, 8}; }
std::vector<std::uint32_t> unseen_tool_ids() { return {9, 10, 11}; }

} // namespace cttp::sim
