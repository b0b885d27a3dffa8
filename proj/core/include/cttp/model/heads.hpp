#pragma once

#include "cttp/model/layers.hpp"

namespace cttp::model {

/// Single linear layer over backbone features.
template <class T>
struct ClassifierHead {
    Linear<T> linear;

    static ClassifierHead init(std::size_t in, std::size_t classes, Rng& rng) {
        return {Linear<T>::init(in, classes, rng)};
    }
    std::size_t classes() const { return linear.out_features(); }
    Tensor<T> operator()(const Tensor<T>& features) const { return linear(features); }
    void collect(const std::string& prefix, ParamList<T>& out) const { linear.collect(prefix + ".linear", out); }
    template <class U>
    ClassifierHead<U> cast() const {
        return {linear.template cast<U>()};
    }
};

/// D_b -> 256 -> 256 -> (y, z, theta/3.75)
template <class T>
struct PoseHead {
    Linear<T> l1, l2, l3;

    static PoseHead init(std::size_t in, Rng& rng, std::size_t hidden = 256) {
        auto a = Linear<T>::init(in, hidden, rng);
        auto b = Linear<T>::init(hidden, hidden, rng);
        auto c = Linear<T>::init(hidden, 3, rng);
        return {a, b, c};
    }
    Tensor<T> operator()(const Tensor<T>& features) const {
        return l3(ad::relu(l2(ad::relu(l1(features)))));
    }
    void collect(const std::string& prefix, ParamList<T>& out) const {
        l1.collect(prefix + ".l1", out);
        l2.collect(prefix + ".l2", out);
        l3.collect(prefix + ".l3", out);
    }
    template <class U>
    PoseHead<U> cast() const {
        return {l1.template cast<U>(), l2.template cast<U>(), l3.template cast<U>()};
    }
};

/// Linear decoder from backbone features to a flattened frame.
template <class T>
struct ReconHead {
    Linear<T> linear;

    static ReconHead init(std::size_t in, std::size_t frame_values, Rng& rng) {
        return {Linear<T>::init(in, frame_values, rng)};
    }
    Tensor<T> operator()(const Tensor<T>& features) const { return linear(features); }
    void collect(const std::string& prefix, ParamList<T>& out) const { linear.collect(prefix + ".linear", out); }
    template <class U>
    ReconHead<U> cast() const {
        return {linear.template cast<U>()};
    }
};

} // namespace cttp::model
