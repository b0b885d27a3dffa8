#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cttp/dataio/report.hpp"
#include "cttp/model/encoder.hpp"
#include "cttp/model/heads.hpp"

namespace cttp::eval {

enum class FeatureKind { backbone, projected };

/// Frozen features of one sensor's frames, row-major [count, dim], tagged
/// with the sensor whose tower produced them.
struct FeatureSet {
    SensorKind sensor = SensorKind::membrane;
    std::size_t dim = 0;
    std::vector<float> values;
    std::vector<sim::GraspSample> grasps;

    std::size_t count() const { return grasps.size(); }
    std::span<const float> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
};

/// Runs the kind's tower over that sensor's frames without recording.
FeatureSet extract_features(const model::DualEncoder<float>& encoder, std::span<const sim::PairedRecord> records,
                            SensorKind kind, FeatureKind which = FeatureKind::backbone, std::size_t batch = 256);

/// Per-dimension affine map fitted on probe training features.
struct Standardizer {
    std::vector<float> mean;
    std::vector<float> inv_std;

    static Standardizer fit(const FeatureSet& features);
    static Standardizer identity(std::size_t dim);
    ad::Tensor<float> apply(const FeatureSet& features) const;
};

/// Frozen-feature extraction with one Standardizer per sensor, each fitted
/// on that sensor's features of an unlabeled reference split (the pretrain
/// split). Probe inputs of either sensor pass through their own sensor's
/// statistics.
struct FeatureExtractor {
    const model::DualEncoder<float>* encoder = nullptr;
    FeatureKind which = FeatureKind::backbone;
    Standardizer gel_norm;
    Standardizer membrane_norm;

    static FeatureExtractor fit(const model::DualEncoder<float>& encoder, std::span<const sim::PairedRecord> reference,
                                FeatureKind which = FeatureKind::backbone);
    /// Identity statistics: raw features.
    static FeatureExtractor raw(const model::DualEncoder<float>& encoder, FeatureKind which = FeatureKind::backbone);
    FeatureSet operator()(std::span<const sim::PairedRecord> records, SensorKind kind) const;
};

struct ProbeConfig {
    std::size_t class_epochs = 200;
    std::size_t pose_epochs = 300;
    double lr = 3e-4;
    std::size_t batch_size = 16; // 0 = full batch
    bool standardize = false;    // refit statistics on the probe's own train split
    std::uint64_t seed = 11;
    FeatureKind features = FeatureKind::backbone;
};

struct ClassProbe {
    SensorKind trained_on = SensorKind::membrane;
    std::vector<std::uint32_t> tools; // class index -> tool id
    Standardizer standardizer;
    model::ClassifierHead<float> head;
    double train_accuracy = 0.0;

    std::vector<std::uint32_t> predict(const FeatureSet& features) const;
};

struct PoseProbe {
    SensorKind trained_on = SensorKind::membrane;
    Standardizer standardizer;
    model::PoseHead<float> head;
    double train_mse = 0.0;

    /// (y mm, z mm, theta deg) per row.
    std::vector<std::array<double, 3>> predict(const FeatureSet& features) const;
};

ClassProbe train_class_probe(const FeatureSet& train, const ProbeConfig& config);
PoseProbe train_pose_probe(const FeatureSet& train, const ProbeConfig& config);

struct ClassResult {
    std::size_t correct = 0;
    std::size_t total = 0;
    std::size_t classes = 0;
    double top1 = 0.0;
};
ClassResult evaluate_class_probe(const ClassProbe& probe, const FeatureSet& test);

struct PoseErrorSummary {
    io::MeanStd y, z, theta; // signed errors: predicted - true
    double within_translation = 0.0;
    double within_rotation = 0.0;
    double translation_tol = 3.0;
    double rotation_tol = 5.0;
    std::size_t count = 0;
    std::vector<std::array<double, 3>> errors;
};
PoseErrorSummary summarize_pose_errors(std::span<const std::array<double, 3>> predicted,
                                       std::span<const sim::GraspSample> truth, double translation_tol = 3.0,
                                       double rotation_tol = 5.0);
PoseErrorSummary evaluate_pose_probe(const PoseProbe& probe, const FeatureSet& test);

} // namespace cttp::eval
