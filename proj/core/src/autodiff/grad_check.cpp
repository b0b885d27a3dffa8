#include "cttp/autodiff/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "cttp/autodiff/tape.hpp"
#include "cttp/error.hpp"

namespace cttp::ad {

double GradCheckReport::max_rel_error() const {
    double worst = 0.0;
    for (const auto& p : params) worst = std::max(worst, p.max_rel_error);
    return worst;
}

GradCheckReport grad_check(const std::function<Tensor<double>()>& fn, ParamList<double> params,
                           GradCheckOptions options) {
    GradCheckReport report;
    report.tol = options.tol;

    std::vector<std::vector<double>> analytic;
    try {
        for (auto& p : params) {
            p.tensor.set_requires_grad(true);
            p.tensor.zero_grad();
        }
        Tape<double> tape;
        auto loss = fn();
        if (loss.numel() != 1) throw ShapeError("grad_check: function must return a scalar, got " + shape_str(loss.shape()));
        if (!loss.all_finite()) {
            report.failure = "non-finite loss";
            return report;
        }
        tape.backward(loss);
        for (auto& p : params) {
            if (p.tensor.has_grad()) {
                analytic.emplace_back(p.tensor.grad().begin(), p.tensor.grad().end());
            } else {
                analytic.emplace_back(p.tensor.numel(), 0.0);
            }
            p.tensor.zero_grad();
        }
    } catch (const NumericError& e) {
        report.failure = e.what();
        return report;
    }

    auto eval = [&]() {
        NoGradGuard<double> no_grad;
        return fn().item();
    };

    bool finite = true;
    for (std::size_t pi = 0; pi < params.size() && finite; ++pi) {
        auto& p = params[pi];
        ParamGradError err{p.name};
        auto values = p.tensor.data();
        for (std::size_t j = 0; j < values.size(); ++j) {
            const double saved = values[j];
            values[j] = saved + options.step;
            const double up = eval();
            values[j] = saved - options.step;
            const double down = eval();
            values[j] = saved;
            if (!std::isfinite(up) || !std::isfinite(down)) {
                report.failure = "non-finite loss while perturbing '" + p.name + "'";
                finite = false;
                break;
            }
            const double numeric = (up - down) / (2.0 * options.step);
            const double a = analytic[pi][j];
            const double denom = std::max({std::abs(a), std::abs(numeric), options.floor});
            const double rel = std::abs(a - numeric) / denom;
            if (j == 0 || rel > err.max_rel_error) {
                err.max_rel_error = rel;
                err.worst_index = j;
                err.analytic = a;
                err.numeric = numeric;
            }
        }
        report.params.push_back(err);
    }
    report.passed = finite && report.failure.empty() && report.max_rel_error() <= options.tol;
    return report;
}

} // namespace cttp::ad
