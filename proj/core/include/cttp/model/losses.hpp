#pragma once

#include <span>
#include <vector>

#include "cttp/autodiff/ops.hpp"
#include "cttp/sensorsim/records.hpp"

namespace cttp::model {

/// a.b / (|a||b|); a zero vector is a NumericError.
double cosine_sim(std::span<const float> a, std::span<const float> b);
double cosine_sim(std::span<const double> a, std::span<const double> b);

struct ContrastiveConfig {
    double tau = 0.07;
    bool symmetric = true;
};

/// InfoNCE over S = norm(Z1) norm(Z2)^T / tau with positives on the
/// diagonal. Symmetric mode averages the row and column directions.
template <class T>
ad::Tensor<T> infonce_loss(const ad::Tensor<T>& z1, const ad::Tensor<T>& z2, const ContrastiveConfig& cfg);

template <class T>
ad::Tensor<T> similarity_logits(const ad::Tensor<T>& z1, const ad::Tensor<T>& z2, double tau);

template <class T>
ad::Tensor<T> ce_loss(const ad::Tensor<T>& logits, std::span<const int> labels);

/// y, z in mm and theta scaled by 1/kThetaScale, [N, 3].
inline constexpr double kThetaScale = 3.75;
template <class T>
ad::Tensor<T> pose_targets(std::span<const sim::GraspSample> grasps);

template <class T>
ad::Tensor<T> pose_loss(const ad::Tensor<T>& pred, const ad::Tensor<T>& targets);

/// pred [N, C*H*W] against frames [N, C, H, W].
template <class T>
ad::Tensor<T> recon_loss(const ad::Tensor<T>& pred, const ad::Tensor<T>& frames);

/// Row-wise argmax of [N, K]; ties resolve to the lowest index.
template <class T>
std::vector<int> argmax_rows(const ad::Tensor<T>& logits);

} // namespace cttp::model
