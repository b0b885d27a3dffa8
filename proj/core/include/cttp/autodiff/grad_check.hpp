#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cttp/autodiff/tensor.hpp"

namespace cttp::ad {

struct GradCheckOptions {
    double tol = 1e-4;
    double step = 1e-3; // central-difference half width
    // Denominator floor for the relative error; components whose analytic
    // and numeric magnitudes are both below it are compared absolutely.
    double floor = 1e-3;
};

struct ParamGradError {
    std::string name;
    double max_rel_error = 0.0;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
};

struct GradCheckReport {
    std::vector<ParamGradError> params;
    double tol = 0.0;
    bool passed = false;
    std::string failure; // set when the function could not be evaluated
    double max_rel_error() const;
};

/// Compares tape gradients of a scalar function against central finite
/// differences, parameter by parameter. Non-finite values produce a failed
/// report rather than an exception.
GradCheckReport grad_check(const std::function<Tensor<double>()>& fn, ParamList<double> params,
                           GradCheckOptions options = {});

} // namespace cttp::ad
