#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "cttp/sensorsim/records.hpp"
#include "cttp/sensorsim/tools.hpp"

namespace cttp::sim {

/// Indentation depth per pixel (mm), row-major. Pixel (row, col) has its
/// center at x = (col + 0.5 - width/2) * pitch, y = (row + 0.5 - height/2) * pitch.
struct HeightField {
    std::size_t height = 32;
    std::size_t width = 32;
    double pixel_pitch = 1.0; // mm per pixel
    std::vector<double> h;

    HeightField() = default;
    HeightField(std::size_t rows, std::size_t cols, double pitch = 1.0)
        : height(rows), width(cols), pixel_pitch(pitch), h(rows * cols, 0.0) {}
    double& at(std::size_t row, std::size_t col) { return h[row * width + col]; }
    double at(std::size_t row, std::size_t col) const { return h[row * width + col]; }
};

struct ContactParams {
    std::size_t height = 32;
    std::size_t width = 32;
    double pixel_pitch = 1.0;
    double falloff = 1.5; // mm
};

struct MembraneParams {
    double blur_sigma = 2.5; // px
    double noise_std = 0.01; // mm
};

struct GelParams {
    double blur_sigma = 0.8; // px
    double base = 0.35;
    double gain = 1.5;
    double light_elevation = 0.4;
    std::array<double, 3> light_azimuth_deg{0.0, 120.0, 240.0}; // R, G, B
    double noise_std = 0.01;
};

/// h = depth * clamp(1 - s / falloff, 0, 1) with s the tool SDF evaluated
/// in the tool frame: q = R(-theta) (p - (y, z)).
HeightField render_heightfield(const GraspSample& grasp, const ToolShape& shape, const ContactParams& params = {});

/// Normalized, truncated (radius ceil(3 sigma)) 1-D Gaussian weights,
/// index 0 is the center tap.
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian blur with replicate boundary.
HeightField gaussian_blur(const HeightField& in, double sigma);

TactileFrame render_membrane(const HeightField& h, const MembraneParams& params, std::uint64_t noise_seed);
TactileFrame render_gel(const HeightField& h, const GelParams& params, std::uint64_t noise_seed);

} // namespace cttp::sim
