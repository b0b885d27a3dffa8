#include "cttp/autodiff/adam.hpp"

#include <cmath>

#include "cttp/error.hpp"

namespace cttp::ad {

template <class T>
AdamState make_adam_state(const ParamList<T>& params, AdamOptions options) {
    AdamState state;
    state.options = options;
    for (const auto& p : params) {
        state.m.emplace_back(p.tensor.numel(), 0.0);
        state.v.emplace_back(p.tensor.numel(), 0.0);
    }
    return state;
}

template <class T>
void adam_step(ParamList<T>& params, AdamState& state) {
    if (params.size() != state.m.size()) {
        throw ShapeError("adam_step: " + std::to_string(params.size()) + " parameters but state holds " +
                         std::to_string(state.m.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& t = params[i].tensor;
        if (t.numel() != state.m[i].size()) {
            throw ShapeError("adam_step: parameter '" + params[i].name + "' has " + std::to_string(t.numel()) +
                             " elements, moment buffer has " + std::to_string(state.m[i].size()));
        }
        for (T g : t.grad()) {
            if (!std::isfinite(g)) throw NumericError("adam_step: non-finite gradient in parameter '" + params[i].name + "'");
        }
    }

    const auto& o = state.options;
    state.step += 1;
    const double bc1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& t = params[i].tensor;
        if (!t.has_grad()) continue;
        auto grad = t.grad();
        auto value = t.data();
        auto& m = state.m[i];
        auto& v = state.v[i];
        for (std::size_t j = 0; j < value.size(); ++j) {
            const double g = grad[j];
            m[j] = o.beta1 * m[j] + (1.0 - o.beta1) * g;
            v[j] = o.beta2 * v[j] + (1.0 - o.beta2) * g * g;
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            value[j] = static_cast<T>(value[j] - o.lr * mhat / (std::sqrt(vhat) + o.eps));
        }
    }
}

template AdamState make_adam_state<float>(const ParamList<float>&, AdamOptions);
template AdamState make_adam_state<double>(const ParamList<double>&, AdamOptions);
template void adam_step<float>(ParamList<float>&, AdamState&);
template void adam_step<double>(ParamList<double>&, AdamState&);

} // namespace cttp::ad
