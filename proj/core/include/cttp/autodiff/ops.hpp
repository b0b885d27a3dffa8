#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cttp/autodiff/tensor.hpp"

// Differentiable ops. Each records a node on the active Tape when any input
// requires grad. Reductions accumulate in double regardless of T.
namespace cttp::ad {

struct Conv2dOptions {
    std::size_t stride = 1;
    std::size_t pad = 0;
};

// [m,k] x [k,n] -> [m,n]
template <class T> Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);
// [m,n] -> [n,m]
template <class T> Tensor<T> transpose(const Tensor<T>& a);

template <class T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <class T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <class T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <class T> Tensor<T> scale(const Tensor<T>& a, double factor);
// factor * a + offset, element-wise
template <class T> Tensor<T> affine(const Tensor<T>& a, double factor, double offset);

// x:[n,f] + b:[f]
template <class T> Tensor<T> add_bias(const Tensor<T>& x, const Tensor<T>& bias);

template <class T> Tensor<T> relu(const Tensor<T>& x);

// x:[n,c,h,w], weight:[o,c,kh,kw], bias:[o] -> [n,o,oh,ow], zero padding.
template <class T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias, Conv2dOptions opt);
template <class T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, Conv2dOptions opt);

// Mean over the listed axes; those axes are removed from the result
// (a full reduction yields shape [1]).
template <class T> Tensor<T> mean(const Tensor<T>& x, std::vector<std::size_t> axes);
template <class T> Tensor<T> mean_all(const Tensor<T>& x);
template <class T> Tensor<T> sum_all(const Tensor<T>& x);

// [n,c,h,w] -> [n,c]
template <class T> Tensor<T> global_avg_pool(const Tensor<T>& x);

// Divides each last-axis row by max(||row||, eps).
template <class T> Tensor<T> l2_normalize(const Tensor<T>& x, double eps = 1e-12);

// Removes `axis`.
template <class T> Tensor<T> logsumexp(const Tensor<T>& x, std::size_t axis);

// Mean over rows of -log softmax(logits)[label].
template <class T>
Tensor<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const int> labels);

// Mean of squared differences over every element.
template <class T> Tensor<T> mse(const Tensor<T>& pred, const Tensor<T>& target);

template <class T> Tensor<T> reshape(const Tensor<T>& x, Shape shape);

} // namespace cttp::ad
