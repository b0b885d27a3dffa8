#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cttp/autodiff/grad_check.hpp"

namespace cttp::cli {

struct GradCheckCase {
    std::string name;
    ad::GradCheckReport report;
};

/// Double-precision finite-difference checks of every differentiable op,
/// every layer and head, the encoder towers and each training loss, at
/// small seeded shapes.
std::vector<GradCheckCase> run_gradcheck_suite(double tol = 1e-4, std::uint64_t seed = 3);

bool all_passed(const std::vector<GradCheckCase>& cases);
nlohmann::json gradcheck_json(const std::vector<GradCheckCase>& cases);

} // namespace cttp::cli
