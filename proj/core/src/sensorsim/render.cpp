#include "cttp/sensorsim/render.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cttp/autodiff/rng.hpp"

namespace cttp::sim {

HeightField render_heightfield(const GraspSample& grasp, const ToolShape& shape, const ContactParams& params) {
    HeightField out(params.height, params.width, params.pixel_pitch);
    if (grasp.depth == 0.0f) return out;
    const double rad = static_cast<double>(grasp.theta) * std::numbers::pi / 180.0;
    const double c = std::cos(rad);
    const double s = std::sin(rad);
    const double half_w = static_cast<double>(params.width) / 2.0;
    const double half_h = static_cast<double>(params.height) / 2.0;
    for (std::size_t row = 0; row < params.height; ++row) {
        const double py = (static_cast<double>(row) + 0.5 - half_h) * params.pixel_pitch;
        const double dy = py - static_cast<double>(grasp.z);
        for (std::size_t col = 0; col < params.width; ++col) {
            const double px = (static_cast<double>(col) + 0.5 - half_w) * params.pixel_pitch;
            const double dx = px - static_cast<double>(grasp.y);
            const Vec2 q{c * dx + s * dy, -s * dx + c * dy};
            const double dist = shape.sdf.eval(q);
            out.at(row, col) = grasp.depth * std::clamp(1.0 - dist / params.falloff, 0.0, 1.0);
        }
    }
    return out;
}

std::vector<double> gaussian_kernel(double sigma) {
    const auto radius = static_cast<std::size_t>(std::ceil(3.0 * sigma));
    std::vector<double> w(radius + 1);
    double total = 0.0;
    for (std::size_t k = 0; k <= radius; ++k) {
        w[k] = std::exp(-static_cast<double>(k * k) / (2.0 * sigma * sigma));
        total += k == 0 ? w[k] : 2.0 * w[k];
    }
    for (auto& v : w) v /= total;
    return w;
}

HeightField gaussian_blur(const HeightField& in, double sigma) {
    const auto w = gaussian_kernel(sigma);
    const auto radius = static_cast<std::ptrdiff_t>(w.size() - 1);
    const auto rows = static_cast<std::ptrdiff_t>(in.height);
    const auto cols = static_cast<std::ptrdiff_t>(in.width);
    auto clamp_idx = [](std::ptrdiff_t i, std::ptrdiff_t n) { return std::clamp<std::ptrdiff_t>(i, 0, n - 1); };

    HeightField tmp(in.height, in.width, in.pixel_pitch);
    for (std::ptrdiff_t r = 0; r < rows; ++r) {
        for (std::ptrdiff_t c = 0; c < cols; ++c) {
            double acc = w[0] * in.h[r * cols + c];
            for (std::ptrdiff_t k = 1; k <= radius; ++k) {
                acc += w[k] * (in.h[r * cols + clamp_idx(c - k, cols)] + in.h[r * cols + clamp_idx(c + k, cols)]);
            }
            tmp.h[r * cols + c] = acc;
        }
    }
    HeightField out(in.height, in.width, in.pixel_pitch);
    for (std::ptrdiff_t r = 0; r < rows; ++r) {
        for (std::ptrdiff_t c = 0; c < cols; ++c) {
            double acc = w[0] * tmp.h[r * cols + c];
            for (std::ptrdiff_t k = 1; k <= radius; ++k) {
                acc += w[k] * (tmp.h[clamp_idx(r - k, rows) * cols + c] + tmp.h[clamp_idx(r + k, rows) * cols + c]);
            }
            out.h[r * cols + c] = acc;
        }
    }
    return out;
}

TactileFrame render_membrane(const HeightField& h, const MembraneParams& params, std::uint64_t noise_seed) {
    const auto blurred = gaussian_blur(h, params.blur_sigma);
    TactileFrame frame{SensorKind::membrane, 1, h.height, h.width, std::vector<float>(h.height * h.width)};
    Rng rng(noise_seed);
    for (std::size_t i = 0; i < frame.data.size(); ++i) {
        const double v = blurred.h[i] + rng.normal(0.0, params.noise_std);
        frame.data[i] = static_cast<float>(std::max(v, 0.0));
    }
    return frame;
}

TactileFrame render_gel(const HeightField& h, const GelParams& params, std::uint64_t noise_seed) {
    const auto g = gaussian_blur(h, params.blur_sigma);
    const std::size_t rows = h.height, cols = h.width;
    TactileFrame frame{SensorKind::gel, 3, rows, cols, std::vector<float>(3 * rows * cols)};

    std::array<std::array<double, 3>, 3> lights{};
    for (std::size_t c = 0; c < 3; ++c) {
        const double phi = params.light_azimuth_deg[c] * std::numbers::pi / 180.0;
        const double norm = std::sqrt(1.0 + params.light_elevation * params.light_elevation);
        lights[c] = {std::cos(phi) / norm, std::sin(phi) / norm, params.light_elevation / norm};
    }

    // The gel surface sits at -g (indentation pushes it in), so the outward
    // normal of that surface is normalize(dg/dx, dg/dy, 1).
    const double pitch = h.pixel_pitch;
    Rng rng(noise_seed);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            double gx, gy;
            if (c == 0) gx = (g.at(r, 1) - g.at(r, 0)) / pitch;
            else if (c + 1 == cols) gx = (g.at(r, c) - g.at(r, c - 1)) / pitch;
            else gx = (g.at(r, c + 1) - g.at(r, c - 1)) / (2.0 * pitch);
            if (r == 0) gy = (g.at(1, c) - g.at(0, c)) / pitch;
            else if (r + 1 == rows) gy = (g.at(r, c) - g.at(r - 1, c)) / pitch;
            else gy = (g.at(r + 1, c) - g.at(r - 1, c)) / (2.0 * pitch);
            const double nn = std::sqrt(gx * gx + gy * gy + 1.0);
            const std::array<double, 3> n{gx / nn, gy / nn, 1.0 / nn};
            for (std::size_t ch = 0; ch < 3; ++ch) {
                const auto& l = lights[ch];
                const double shade = n[0] * l[0] + n[1] * l[1] + n[2] * l[2] - l[2];
                double v = std::clamp(params.base + params.gain * shade, 0.0, 1.0);
                v = std::clamp(v + rng.normal(0.0, params.noise_std), 0.0, 1.0);
                frame.data[(ch * rows + r) * cols + c] = static_cast<float>(v);
            }
        }
    }
    return frame;
}

} // namespace cttp::sim
