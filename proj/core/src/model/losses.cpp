#include "cttp/model/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cttp/error.hpp"

namespace cttp::model {

namespace {

template <class V>
double cosine_impl(std::span<const V> a, std::span<const V> b) {
    if (a.size() != b.size()) {
        throw ShapeError("cosine_sim: length mismatch " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += double(a[i]) * double(b[i]);
        na += double(a[i]) * double(a[i]);
        nb += double(b[i]) * double(b[i]);
    }
    if (na == 0.0 || nb == 0.0) throw NumericError("cosine_sim: zero vector");
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

} // namespace

double cosine_sim(std::span<const float> a, std::span<const float> b) { return cosine_impl(a, b); }
double cosine_sim(std::span<const double> a, std::span<const double> b) { return cosine_impl(a, b); }

template <class T>
ad::Tensor<T> similarity_logits(const ad::Tensor<T>& z1, const ad::Tensor<T>& z2, double tau) {
    if (!(tau > 0.0)) throw ConfigError("infonce: tau must be positive, got " + std::to_string(tau));
    if (z1.rank() != 2 || z1.shape() != z2.shape()) {
        throw ShapeError("infonce: shape mismatch " + ad::shape_str(z1.shape()) + " vs " +
                         ad::shape_str(z2.shape()));
    }
    auto n1 = ad::l2_normalize(z1);
    auto n2 = ad::l2_normalize(z2);
    return ad::scale(ad::matmul(n1, ad::transpose(n2)), 1.0 / tau);
}

template <class T>
ad::Tensor<T> infonce_loss(const ad::Tensor<T>& z1, const ad::Tensor<T>& z2, const ContrastiveConfig& cfg) {
    if (z1.rank() == 2 && z1.dim(0) < 2) throw ShapeError("infonce: need at least 2 rows for negatives");
    auto s = similarity_logits(z1, z2, cfg.tau);
    std::vector<int> labels(z1.dim(0));
    std::iota(labels.begin(), labels.end(), 0);
    auto forward = ad::softmax_cross_entropy(s, std::span<const int>(labels));
    if (!cfg.symmetric) return forward;
    auto backward = ad::softmax_cross_entropy(ad::transpose(s), std::span<const int>(labels));
    return ad::scale(ad::add(forward, backward), 0.5);
}

template <class T>
ad::Tensor<T> ce_loss(const ad::Tensor<T>& logits, std::span<const int> labels) {
    return ad::softmax_cross_entropy(logits, labels);
}

template <class T>
ad::Tensor<T> pose_targets(std::span<const sim::GraspSample> grasps) {
    ad::Tensor<T> out({grasps.size(), 3});
    for (std::size_t i = 0; i < grasps.size(); ++i) {
        out[3 * i] = T(grasps[i].y);
        out[3 * i + 1] = T(grasps[i].z);
        out[3 * i + 2] = T(double(grasps[i].theta) / kThetaScale);
    }
    return out;
}

template <class T>
ad::Tensor<T> pose_loss(const ad::Tensor<T>& pred, const ad::Tensor<T>& targets) {
    return ad::mse(pred, targets);
}

template <class T>
ad::Tensor<T> recon_loss(const ad::Tensor<T>& pred, const ad::Tensor<T>& frames) {
    if (frames.rank() != 4) throw ShapeError("recon_loss: frames must be [N,C,H,W], got " + ad::shape_str(frames.shape()));
    const std::size_t n = frames.dim(0);
    return ad::mse(pred, ad::reshape(frames, {n, frames.numel() / n}));
}

template <class T>
std::vector<int> argmax_rows(const ad::Tensor<T>& logits) {
    if (logits.rank() != 2) throw ShapeError("argmax_rows: expected [N,K], got " + ad::shape_str(logits.shape()));
    const std::size_t n = logits.dim(0), k = logits.dim(1);
    std::vector<int> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < k; ++j) {
            if (logits[i * k + j] > logits[i * k + best]) best = j;
        }
        out[i] = int(best);
    }
    return out;
}

#define CTTP_INSTANTIATE_LOSSES(T)                                                                        \
    template ad::Tensor<T> similarity_logits(const ad::Tensor<T>&, const ad::Tensor<T>&, double);         \
    template ad::Tensor<T> infonce_loss(const ad::Tensor<T>&, const ad::Tensor<T>&, const ContrastiveConfig&); \
    template ad::Tensor<T> ce_loss(const ad::Tensor<T>&, std::span<const int>);                           \
    template ad::Tensor<T> pose_targets<T>(std::span<const sim::GraspSample>);                            \
    template ad::Tensor<T> pose_loss(const ad::Tensor<T>&, const ad::Tensor<T>&);                         \
    template ad::Tensor<T> recon_loss(const ad::Tensor<T>&, const ad::Tensor<T>&);                        \
    template std::vector<int> argmax_rows(const ad::Tensor<T>&);

CTTP_INSTANTIATE_LOSSES(float)
CTTP_INSTANTIATE_LOSSES(double)

} // namespace cttp::model
