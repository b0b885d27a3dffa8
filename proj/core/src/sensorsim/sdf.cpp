#include "cttp/sensorsim/sdf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <variant>

namespace cttp::sim {

namespace {

double length(Vec2 p) { return std::hypot(p.x, p.y); }
double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double sd_box(Vec2 p, double bx, double by) {
    const double dx = std::abs(p.x) - bx;
    const double dy = std::abs(p.y) - by;
    return std::hypot(std::max(dx, 0.0), std::max(dy, 0.0)) + std::min(std::max(dx, dy), 0.0);
}

// Closest point on the ellipse by fixed-point iteration on the evolute
// (converges to machine precision well within the iteration budget).
double sd_ellipse(Vec2 p, double a, double b) {
    const double px = std::abs(p.x);
    const double py = std::abs(p.y);
    if (a == b) return std::hypot(px, py) - a;
    double tx = std::numbers::sqrt2 / 2.0;
    double ty = std::numbers::sqrt2 / 2.0;
    for (int i = 0; i < 12; ++i) {
        const double x = a * tx;
        const double y = b * ty;
        const double ex = (a * a - b * b) * tx * tx * tx / a;
        const double ey = (b * b - a * a) * ty * ty * ty / b;
        const double rx = x - ex;
        const double ry = y - ey;
        const double qx = px - ex;
        const double qy = py - ey;
        const double r = std::hypot(rx, ry);
        const double q = std::hypot(qx, qy);
        if (q < 1e-15) break;
        tx = std::clamp((qx * r / q + ex) / a, 0.0, 1.0);
        ty = std::clamp((qy * r / q + ey) / b, 0.0, 1.0);
        const double t = std::hypot(tx, ty);
        tx /= t;
        ty /= t;
    }
    const double dist = std::hypot(px - a * tx, py - b * ty);
    const double inside = (px * px) / (a * a) + (py * py) / (b * b);
    return inside < 1.0 ? -dist : dist;
}

double sd_triangle(Vec2 p, double r) {
    const double k = std::sqrt(3.0);
    p.x = std::abs(p.x) - r;
    p.y = p.y + r / k;
    if (p.x + k * p.y > 0.0) p = Vec2{(p.x - k * p.y) / 2.0, (-k * p.x - p.y) / 2.0};
    p.x -= std::clamp(p.x, -2.0 * r, 0.0);
    return -length(p) * sign(p.y);
}

double sd_hexagon(Vec2 p, double r) {
    const Vec2 k{-0.866025403784438647, 0.5};
    const double kz = 0.577350269189625765;
    p = Vec2{std::abs(p.x), std::abs(p.y)};
    const double d = 2.0 * std::min(dot(k, p), 0.0);
    p.x -= d * k.x;
    p.y -= d * k.y;
    p.x -= std::clamp(p.x, -kz * r, kz * r);
    p.y -= r;
    return length(p) * sign(p.y);
}

double sd_cross(Vec2 p, double bx, double by) {
    p = Vec2{std::abs(p.x), std::abs(p.y)};
    if (p.y > p.x) std::swap(p.x, p.y);
    const Vec2 q{p.x - bx, p.y - by};
    const double k = std::max(q.x, q.y);
    const Vec2 w = k > 0.0 ? q : Vec2{by - p.x, -k};
    return sign(k) * std::hypot(std::max(w.x, 0.0), std::max(w.y, 0.0));
}

double sd_star5(Vec2 p, double r, double rf) {
    const Vec2 k1{0.809016994374947424, -0.587785252292473129};
    const Vec2 k2{-k1.x, k1.y};
    p.x = std::abs(p.x);
    double d = 2.0 * std::max(dot(k1, p), 0.0);
    p.x -= d * k1.x;
    p.y -= d * k1.y;
    d = 2.0 * std::max(dot(k2, p), 0.0);
    p.x -= d * k2.x;
    p.y -= d * k2.y;
    p.x = std::abs(p.x);
    p.y -= r;
    const Vec2 ba{rf * -k1.y - 0.0, rf * k1.x - 1.0};
    const double h = std::clamp(dot(p, ba) / dot(ba, ba), 0.0, r);
    return std::hypot(p.x - ba.x * h, p.y - ba.y * h) * sign(p.y * ba.x - p.x * ba.y);
}

} // namespace

struct Primitive {
    std::string kind;
    double a = 0.0, b = 0.0, c = 0.0;
};
struct Transform {
    double dx = 0.0, dy = 0.0, degrees = 0.0;
};
enum class Combine { unite, intersect, subtract };

struct Sdf::Node {
    std::variant<Primitive, Transform, Combine> op;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
};

namespace {

double eval_node(const Sdf::Node& n, Vec2 p) {
    if (const auto* prim = std::get_if<Primitive>(&n.op)) {
        const auto& k = prim->kind;
        if (k == "circle") return length(p) - prim->a;
        if (k == "box") return sd_box(p, prim->a, prim->b);
        if (k == "ellipse") return sd_ellipse(p, prim->a, prim->b);
        if (k == "triangle") return sd_triangle(p, prim->a);
        if (k == "hexagon") return sd_hexagon(p, prim->a);
        if (k == "capsule") {
            p.x -= std::clamp(p.x, -prim->a, prim->a);
            return length(p) - prim->b;
        }
        if (k == "annulus") return std::abs(length(p) - prim->a) - prim->b / 2.0;
        if (k == "plus_cross") return sd_cross(p, prim->a, prim->b);
        if (k == "stadium") return sd_box(p, prim->a - prim->c, prim->b - prim->c) - prim->c;
        if (k == "star5") return sd_star5(p, prim->a, prim->b);
        return 0.0;
    }
    if (const auto* tr = std::get_if<Transform>(&n.op)) {
        // evaluate the child at the inverse-transformed point
        const double rad = tr->degrees * std::numbers::pi / 180.0;
        const double x = p.x - tr->dx;
        const double y = p.y - tr->dy;
        const double c = std::cos(rad), s = std::sin(rad);
        return eval_node(*n.lhs, Vec2{c * x + s * y, -s * x + c * y});
    }
    const double a = eval_node(*n.lhs, p);
    const double b = eval_node(*n.rhs, p);
    switch (std::get<Combine>(n.op)) {
    case Combine::unite: return std::min(a, b);
    case Combine::intersect: return std::max(a, b);
    case Combine::subtract: return std::max(a, -b);
    }
    return a;
}

nlohmann::json node_json(const Sdf::Node& n) {
    if (const auto* prim = std::get_if<Primitive>(&n.op)) {
        nlohmann::json j{{"primitive", prim->kind}};
        const auto& k = prim->kind;
        if (k == "circle") j["radius"] = prim->a;
        else if (k == "box") j["half_extents"] = {prim->a, prim->b};
        else if (k == "ellipse") j["semi_axes"] = {prim->a, prim->b};
        else if (k == "triangle") j["half_side"] = prim->a;
        else if (k == "hexagon") j["apothem"] = prim->a;
        else if (k == "capsule") j["half_length"] = prim->a, j["radius"] = prim->b;
        else if (k == "annulus") j["radius"] = prim->a, j["thickness"] = prim->b;
        else if (k == "plus_cross") j["arm_half_length"] = prim->a, j["arm_half_width"] = prim->b;
        else if (k == "stadium") j["half_extents"] = {prim->a, prim->b}, j["corner_radius"] = prim->c;
        else if (k == "star5") j["radius"] = prim->a, j["inner_ratio"] = prim->b;
        return j;
    }
    if (const auto* tr = std::get_if<Transform>(&n.op)) {
        return {{"transform", {{"dx", tr->dx}, {"dy", tr->dy}, {"degrees", tr->degrees}}}, {"child", node_json(*n.lhs)}};
    }
    static const char* names[] = {"union", "intersect", "subtract"};
    return {{"combine", names[static_cast<int>(std::get<Combine>(n.op))]},
            {"lhs", node_json(*n.lhs)},
            {"rhs", node_json(*n.rhs)}};
}

std::shared_ptr<const Sdf::Node> prim(std::string kind, double a, double b = 0.0, double c = 0.0) {
    return std::make_shared<const Sdf::Node>(Sdf::Node{Primitive{std::move(kind), a, b, c}, nullptr, nullptr});
}

} // namespace

Sdf Sdf::circle(double radius) { return Sdf(prim("circle", radius)); }
Sdf Sdf::box(double half_x, double half_y) { return Sdf(prim("box", half_x, half_y)); }
Sdf Sdf::ellipse(double semi_x, double semi_y) { return Sdf(prim("ellipse", semi_x, semi_y)); }
Sdf Sdf::triangle(double half_side) { return Sdf(prim("triangle", half_side)); }
Sdf Sdf::hexagon(double apothem) { return Sdf(prim("hexagon", apothem)); }
Sdf Sdf::capsule(double half_length, double radius) { return Sdf(prim("capsule", half_length, radius)); }
Sdf Sdf::annulus(double radius, double thickness) { return Sdf(prim("annulus", radius, thickness)); }
Sdf Sdf::plus_cross(double arm_half_length, double arm_half_width) {
    return Sdf(prim("plus_cross", arm_half_length, arm_half_width));
}
Sdf Sdf::stadium(double half_x, double half_y, double corner_radius) {
    return Sdf(prim("stadium", half_x, half_y, corner_radius));
}
Sdf Sdf::star5(double radius, double inner_ratio) { return Sdf(prim("star5", radius, inner_ratio)); }

Sdf Sdf::translated(double dx, double dy) const {
    return Sdf(std::make_shared<const Node>(Node{Transform{dx, dy, 0.0}, node_, nullptr}));
}

Sdf Sdf::rotated(double degrees) const {
    return Sdf(std::make_shared<const Node>(Node{Transform{0.0, 0.0, degrees}, node_, nullptr}));
}

Sdf unite(const Sdf& a, const Sdf& b) {
    return Sdf(std::make_shared<const Sdf::Node>(Sdf::Node{Combine::unite, a.node_, b.node_}));
}
Sdf intersect(const Sdf& a, const Sdf& b) {
    return Sdf(std::make_shared<const Sdf::Node>(Sdf::Node{Combine::intersect, a.node_, b.node_}));
}
Sdf subtract(const Sdf& a, const Sdf& b) {
    return Sdf(std::make_shared<const Sdf::Node>(Sdf::Node{Combine::subtract, a.node_, b.node_}));
}

double Sdf::eval(Vec2 p) const { return eval_node(*node_, p); }

nlohmann::json Sdf::to_json() const { return node_json(*node_); }

} // namespace cttp::sim
