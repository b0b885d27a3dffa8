#pragma once

#include <memory>
#include <string>
#include <nlohmann/json.hpp>

namespace cttp::sim {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

/// Immutable composition tree of exact 2-D signed distance functions, in mm.
/// Negative inside, positive outside. Union/intersect/subtract use min/max,
/// so the result is a bound (not exact) near combined boundaries.
class Sdf {
public:
    static Sdf circle(double radius);
    static Sdf box(double half_x, double half_y);
    static Sdf ellipse(double semi_x, double semi_y);
    static Sdf triangle(double half_side); // equilateral, apex along +y
    static Sdf hexagon(double apothem);    // flat sides at +-y
    static Sdf capsule(double half_length, double radius); // segment along x
    static Sdf annulus(double radius, double thickness);
    static Sdf plus_cross(double arm_half_length, double arm_half_width);
    static Sdf stadium(double half_x, double half_y, double corner_radius);
    static Sdf star5(double radius, double inner_ratio);

    Sdf translated(double dx, double dy) const;
    Sdf rotated(double degrees) const;

    friend Sdf unite(const Sdf& a, const Sdf& b);
    friend Sdf intersect(const Sdf& a, const Sdf& b);
    friend Sdf subtract(const Sdf& a, const Sdf& b);

    double eval(Vec2 p) const;
    nlohmann::json to_json() const;

    struct Node;

private:
    explicit Sdf(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

Sdf unite(const Sdf& a, const Sdf& b);
Sdf intersect(const Sdf& a, const Sdf& b);
Sdf subtract(const Sdf& a, const Sdf& b);

} // namespace cttp::sim
