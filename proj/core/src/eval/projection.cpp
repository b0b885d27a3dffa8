#include "cttp/eval/projection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "cttp/autodiff/rng.hpp"
#include "cttp/error.hpp"

namespace cttp::eval {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Points2d pca_2d(const PointCloud& data) {
    if (data.n == 0 || data.dim == 0) throw DataError("pca: empty point cloud");
    if (data.values.size() != data.n * data.dim) throw ShapeError("pca: value count does not match n * dim");
    Eigen::Map<const RowMat> x(data.values.data(), Eigen::Index(data.n), Eigen::Index(data.dim));
    const RowMat centred = x.rowwise() - x.colwise().mean();
    const Eigen::MatrixXd cov = centred.transpose() * centred / double(data.n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw NumericError("pca: eigendecomposition failed");

    // Eigenvalues ascend; take the last two columns.
    const Eigen::Index d = Eigen::Index(data.dim);
    Eigen::MatrixXd basis(d, 2);
    for (int k = 0; k < 2; ++k) {
        Eigen::VectorXd v = d - 1 - k >= 0 ? Eigen::VectorXd(eig.eigenvectors().col(d - 1 - k))
                                           : Eigen::VectorXd::Zero(d);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0) v = -v;
        basis.col(k) = v;
    }
    const Eigen::MatrixXd scores = centred * basis;
    Points2d out(data.n);
    for (std::size_t i = 0; i < data.n; ++i) out[i] = {scores(Eigen::Index(i), 0), scores(Eigen::Index(i), 1)};
    return out;
}

std::vector<double> squared_distances(const PointCloud& data) {
    std::vector<double> d2(data.n * data.n, 0.0);
    for (std::size_t i = 0; i < data.n; ++i) {
        for (std::size_t j = i + 1; j < data.n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < data.dim; ++k) {
                const double t = data.at(i, k) - data.at(j, k);
                s += t * t;
            }
            d2[i * data.n + j] = d2[j * data.n + i] = s;
        }
    }
    return d2;
}

namespace {
// Fills row (excluding the diagonal) with exp(-beta (d - dmin)) normalized
// and returns its entropy in nats.
double row_entropy(std::span<const double> d, std::size_t self, double dmin, double beta, std::span<double> p) {
    double sum = 0.0, weighted = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) {
        if (j == self) {
            p[j] = 0.0;
            continue;
        }
        p[j] = std::exp(-beta * (d[j] - dmin));
        sum += p[j];
        weighted += p[j] * (d[j] - dmin);
    }
    for (auto& v : p) v /= sum;
    return std::log(sum) + beta * weighted / sum;
}
} // namespace

ConditionalP conditional_p(std::span<const double> dist2, std::size_t n, double perplexity, double tol, int max_iter) {
    if (dist2.size() != n * n) throw ShapeError("conditional_p: expected an n x n distance matrix");
    if (!(perplexity > 0.0)) throw ConfigError("perplexity must be positive");
    if (n < 2 || double(n - 1) <= perplexity) {
        throw DataError("perplexity " + std::to_string(perplexity) + " needs more than " +
                        std::to_string(std::size_t(perplexity) + 1) + " points, got " + std::to_string(n));
    }
    const double target = std::log(perplexity);
    ConditionalP out;
    out.n = n;
    out.p.assign(n * n, 0.0);
    out.beta.assign(n, 1.0);
    out.entropy.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto d = dist2.subspan(i * n, n);
        std::span<double> p(out.p.data() + i * n, n);
        double dmin = std::numeric_limits<double>::infinity(), dmean = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            dmin = std::min(dmin, d[j]);
            dmean += d[j];
        }
        dmean /= double(n - 1);
        double beta = dmean > dmin ? 1.0 / (dmean - dmin) : 1.0;
        double lo = 0.0, hi = std::numeric_limits<double>::infinity();
        double h = row_entropy(d, i, dmin, beta, p);
        // Search well inside tol so the reported entropy keeps its margin
        // when recomputed from the stored row.
        int it = 0;
        for (; std::abs(h - target) > 0.01 * tol && it < max_iter; ++it) {
            // Larger beta means a narrower kernel and lower entropy.
            if (h > target) {
                lo = beta;
                beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
            } else {
                hi = beta;
                beta = 0.5 * (beta + lo);
            }
            h = row_entropy(d, i, dmin, beta, p);
        }
        if (std::abs(h - target) > tol) {
            throw NumericError("t-SNE bandwidth search failed at point " + std::to_string(i) + ": entropy " +
                               std::to_string(h) + " vs target " + std::to_string(target));
        }
        out.beta[i] = beta;
        out.entropy[i] = h;
    }
    return out;
}

std::vector<double> joint_p(const ConditionalP& c) {
    const std::size_t n = c.n;
    std::vector<double> p(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) p[i * n + j] = (c.p[i * n + j] + c.p[j * n + i]) / (2.0 * double(n));
    }
    return p;
}

Points2d tsne_2d(const PointCloud& data, const TsneConfig& cfg) {
    const std::size_t n = data.n;
    if (n > cfg.max_points) {
        throw DataError("exact t-SNE supports at most " + std::to_string(cfg.max_points) + " points, got " +
                        std::to_string(n) + "; subsample first");
    }
    const auto p = joint_p(conditional_p(squared_distances(data), n, cfg.perplexity, cfg.entropy_tol));

    Points2d y = pca_2d(data);
    double m0 = 0.0, s0 = 0.0;
    for (const auto& v : y) m0 += v[0];
    m0 /= double(n);
    for (const auto& v : y) s0 += (v[0] - m0) * (v[0] - m0);
    s0 = std::sqrt(s0 / double(n));
    const double scale = s0 > 0.0 ? 1e-4 / s0 : 1.0;
    Rng rng = Rng::stream(cfg.seed, "tsne-init");
    for (auto& v : y) {
        for (auto& c : v) c = c * scale + rng.normal(0.0, 1e-8);
    }

    Points2d update(n, {0.0, 0.0}), gains(n, {1.0, 1.0}), grad(n);
    std::vector<double> num(n * n);
    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        const bool early = it < cfg.exaggeration_iters;
        const double exag = early ? cfg.exaggeration : 1.0;
        const double mom = early ? cfg.momentum : cfg.final_momentum;
        double zsum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            num[i * n + i] = 0.0;
            for (std::size_t j = i + 1; j < n; ++j) {
                const double dx = y[i][0] - y[j][0], dy = y[i][1] - y[j][1];
                const double q = 1.0 / (1.0 + dx * dx + dy * dy);
                num[i * n + j] = num[j * n + i] = q;
                zsum += 2.0 * q;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            double gx = 0.0, gy = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double w = (exag * p[i * n + j] - num[i * n + j] / zsum) * num[i * n + j];
                gx += w * (y[i][0] - y[j][0]);
                gy += w * (y[i][1] - y[j][1]);
            }
            grad[i] = {4.0 * gx, 4.0 * gy};
        }
        std::array<double, 2> mean{0.0, 0.0};
        for (std::size_t i = 0; i < n; ++i) {
            for (int c = 0; c < 2; ++c) {
                auto& g = gains[i][c];
                g = (grad[i][c] > 0.0) != (update[i][c] > 0.0) ? g + 0.2 : g * 0.8;
                g = std::max(g, 0.01);
                update[i][c] = mom * update[i][c] - cfg.learning_rate * g * grad[i][c];
                y[i][c] += update[i][c];
                mean[c] += y[i][c];
            }
        }
        for (auto& v : y) {
            v[0] -= mean[0] / double(n);
            v[1] -= mean[1] / double(n);
        }
    }
    for (const auto& v : y) {
        if (!std::isfinite(v[0]) || !std::isfinite(v[1])) throw NumericError("t-SNE produced non-finite coordinates");
    }
    return y;
}

double knn_label_agreement(const Points2d& pts, std::span<const int> labels, std::size_t k) {
    const std::size_t n = pts.size();
    if (labels.size() != n) throw ShapeError("knn_label_agreement: label count mismatch");
    if (k == 0 || k >= n) throw ConfigError("knn_label_agreement: k must be in [1, n)");
    double total = 0.0;
    std::vector<std::pair<double, std::size_t>> d(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double dx = pts[i][0] - pts[j][0], dy = pts[i][1] - pts[j][1];
            d[j] = {j == i ? std::numeric_limits<double>::infinity() : dx * dx + dy * dy, j};
        }
        std::partial_sort(d.begin(), d.begin() + std::ptrdiff_t(k), d.end());
        std::size_t same = 0;
        for (std::size_t m = 0; m < k; ++m) same += labels[d[m].second] == labels[i];
        total += double(same) / double(k);
    }
    return total / double(n);
}

ProjectionMethod parse_projection_method(const std::string& name) {
    if (name == "pca") return ProjectionMethod::pca;
    if (name == "tsne") return ProjectionMethod::tsne;
    throw ConfigError("unknown projection method '" + name + "' (expected pca or tsne)");
}

std::string to_string(ProjectionMethod method) { return method == ProjectionMethod::pca ? "pca" : "tsne"; }

std::vector<ProjectionRow> project_2d(const FeatureExtractor& features, std::span<const sim::PairedRecord> seen,
                                      std::span<const sim::PairedRecord> unseen, ProjectionMethod method,
                                      const TsneConfig& config) {
    PointCloud cloud;
    std::vector<ProjectionRow> rows;
    for (auto [records, is_unseen] : {std::pair{seen, false}, std::pair{unseen, true}}) {
        for (auto kind : {SensorKind::gel, SensorKind::membrane}) {
            if (records.empty()) continue;
            const auto f = features(records, kind);
            cloud.dim = f.dim;
            cloud.values.insert(cloud.values.end(), f.values.begin(), f.values.end());
            for (const auto& g : f.grasps) rows.push_back({0.0, 0.0, g.tool_id, kind, is_unseen});
        }
    }
    cloud.n = rows.size();
    if (method == ProjectionMethod::tsne && cloud.n > config.max_points) {
        throw DataError("t-SNE projection of " + std::to_string(cloud.n) + " points exceeds the limit of " +
                        std::to_string(config.max_points) + "; use fewer test records");
    }
    const auto xy = method == ProjectionMethod::pca ? pca_2d(cloud) : tsne_2d(cloud, config);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].x = xy[i][0];
        rows[i].y = xy[i][1];
    }
    return rows;
}

std::string projection_csv(std::span<const ProjectionRow> rows) {
    std::string out = "x,y,tool_id,sensor,unseen\n";
    char buf[128];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.9g,%.9g,%u,%s,%d\n", r.x, r.y, r.tool_id, to_string(r.sensor).c_str(),
                      r.unseen ? 1 : 0);
        out += buf;
    }
    return out;
}

void write_projection_csv(const std::filesystem::path& path, std::span<const ProjectionRow> rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << projection_csv(rows);
}

} // namespace cttp::eval
