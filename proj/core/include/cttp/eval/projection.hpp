#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cttp/eval/probes.hpp"

namespace cttp::eval {

/// Row-major [n, dim] point set.
struct PointCloud {
    std::size_t n = 0;
    std::size_t dim = 0;
    std::vector<double> values;

    double at(std::size_t i, std::size_t d) const { return values[i * dim + d]; }
};

using Points2d = std::vector<std::array<double, 2>>;

/// Scores on the top two principal components of the mean-centred data.
/// Each component's sign is fixed so its largest-magnitude loading is
/// positive.
Points2d pca_2d(const PointCloud& data);

/// Row-major [n, n] squared Euclidean distances.
std::vector<double> squared_distances(const PointCloud& data);

struct ConditionalP {
    std::size_t n = 0;
    std::vector<double> p;       // row-major [n, n], zero diagonal, rows sum to 1
    std::vector<double> beta;    // 1 / (2 sigma_i^2)
    std::vector<double> entropy; // nats
};

/// Per-point bandwidth search so each row's entropy equals ln(perplexity)
/// within `tol`. NumericError naming the point when a row cannot get there.
ConditionalP conditional_p(std::span<const double> dist2, std::size_t n, double perplexity, double tol = 1e-5,
                           int max_iter = 200);

/// (p_j|i + p_i|j) / 2n; sums to 1.
std::vector<double> joint_p(const ConditionalP& cond);

struct TsneConfig {
    double perplexity = 30.0;
    double entropy_tol = 1e-5;
    std::size_t iterations = 1000;
    std::size_t exaggeration_iters = 250;
    double exaggeration = 12.0;
    double learning_rate = 200.0;
    double momentum = 0.5;
    double final_momentum = 0.8; // from the end of exaggeration on
    std::size_t max_points = 2000;
    std::uint64_t seed = 5;
};

/// Exact symmetric t-SNE with delta-bar-delta gains, initialised from the
/// PCA scores scaled to a first-axis std of 1e-4 plus seeded jitter far
/// below that.
Points2d tsne_2d(const PointCloud& data, const TsneConfig& config = {});

/// Mean fraction of each point's k nearest neighbours (Euclidean, self
/// excluded) that carry the same label.
double knn_label_agreement(const Points2d& points, std::span<const int> labels, std::size_t k);

enum class ProjectionMethod { pca, tsne };
ProjectionMethod parse_projection_method(const std::string& name);
std::string to_string(ProjectionMethod method);

struct ProjectionRow {
    double x = 0.0;
    double y = 0.0;
    std::uint32_t tool_id = 0;
    SensorKind sensor = SensorKind::gel;
    bool unseen = false;
};

/// Co-embeds both sensors' features of the seen and unseen test splits.
/// Rows: seen gel, seen membrane, unseen gel, unseen membrane.
std::vector<ProjectionRow> project_2d(const FeatureExtractor& features, std::span<const sim::PairedRecord> seen,
                                      std::span<const sim::PairedRecord> unseen, ProjectionMethod method,
                                      const TsneConfig& config = {});

/// Header x,y,tool_id,sensor,unseen.
std::string projection_csv(std::span<const ProjectionRow> rows);
void write_projection_csv(const std::filesystem::path& path, std::span<const ProjectionRow> rows);

} // namespace cttp::eval
