#pragma once

#include <cstdint>
#include <vector>

#include "cttp/autodiff/tensor.hpp"

namespace cttp::ad {

struct AdamOptions {
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// First/second moments are kept in double, one buffer per parameter in the
/// order the parameter list was given.
struct AdamState {
    AdamOptions options;
    std::int64_t step = 0;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
};

template <class T>
AdamState make_adam_state(const ParamList<T>& params, AdamOptions options = {});

/// One bias-corrected Adam update from each parameter's accumulated grad.
/// Parameters with no grad buffer are skipped. Throws NumericError naming
/// the first parameter holding a non-finite gradient, before touching any
/// parameter.
template <class T>
void adam_step(ParamList<T>& params, AdamState& state);

template <class T>
void zero_grads(ParamList<T>& params) {
    for (auto& p : params) p.tensor.zero_grad();
}

} // namespace cttp::ad
