#pragma once

#include <string>

#include "cttp/autodiff/init.hpp"
#include "cttp/autodiff/ops.hpp"
#include "cttp/autodiff/tensor.hpp"
#include "cttp/error.hpp"

namespace cttp::model {

using ad::ParamList;
using ad::Tensor;

// Parameters are looked up by name when a module is rebuilt from a
// checkpoint; a missing name or a shape disagreement is a DataError.
template <class T>
Tensor<T> take_param(const ParamList<T>& params, const std::string& name, const ad::Shape& shape) {
    for (const auto& p : params) {
        if (p.name == name) {
            if (p.tensor.shape() != shape) {
                throw DataError("parameter '" + name + "' has shape " + ad::shape_str(p.tensor.shape()) +
                                ", expected " + ad::shape_str(shape));
            }
            return p.tensor;
        }
    }
    throw DataError("missing parameter '" + name + "'");
}

/// y = x W + b with W stored [in, out].
template <class T>
struct Linear {
    Tensor<T> weight;
    Tensor<T> bias;

    static Linear init(std::size_t in, std::size_t out, Rng& rng) {
        return {ad::seeded_init<T>({in, out}, ad::InitScheme::uniform_fan_in, in, rng),
                ad::seeded_init<T>({out}, ad::InitScheme::uniform_fan_in, in, rng)};
    }
    static Linear zeros(std::size_t in, std::size_t out) { return {Tensor<T>({in, out}), Tensor<T>({out})}; }

    std::size_t in_features() const { return weight.dim(0); }
    std::size_t out_features() const { return weight.dim(1); }

    Tensor<T> operator()(const Tensor<T>& x) const { return ad::add_bias(ad::matmul(x, weight), bias); }

    void collect(const std::string& prefix, ParamList<T>& out) const {
        out.push_back({prefix + ".weight", weight});
        out.push_back({prefix + ".bias", bias});
    }
    static Linear load(const ParamList<T>& params, const std::string& prefix, std::size_t in, std::size_t out) {
        return {take_param(params, prefix + ".weight", {in, out}), take_param(params, prefix + ".bias", {out})};
    }
    template <class U>
    Linear<U> cast() const {
        return {ad::tensor_cast<U>(weight), ad::tensor_cast<U>(bias)};
    }
};

/// Square-kernel convolution, weight [out, in, k, k].
template <class T>
struct Conv2d {
    Tensor<T> weight;
    Tensor<T> bias;
    ad::Conv2dOptions options;

    static Conv2d init(std::size_t in, std::size_t out, std::size_t kernel, ad::Conv2dOptions opt, Rng& rng) {
        const std::size_t fan_in = in * kernel * kernel;
        return {ad::seeded_init<T>({out, in, kernel, kernel}, ad::InitScheme::uniform_fan_in, fan_in, rng),
                ad::seeded_init<T>({out}, ad::InitScheme::uniform_fan_in, fan_in, rng), opt};
    }

    Tensor<T> operator()(const Tensor<T>& x) const { return ad::conv2d(x, weight, bias, options); }

    void collect(const std::string& prefix, ParamList<T>& out) const {
        out.push_back({prefix + ".weight", weight});
        out.push_back({prefix + ".bias", bias});
    }
    static Conv2d load(const ParamList<T>& params, const std::string& prefix, std::size_t in, std::size_t out,
                       std::size_t kernel, ad::Conv2dOptions opt) {
        return {take_param(params, prefix + ".weight", {out, in, kernel, kernel}),
                take_param(params, prefix + ".bias", {out}), opt};
    }
    template <class U>
    Conv2d<U> cast() const {
        return {ad::tensor_cast<U>(weight), ad::tensor_cast<U>(bias), options};
    }
};

} // namespace cttp::model
