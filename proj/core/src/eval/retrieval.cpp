#include "cttp/eval/retrieval.hpp"

#include <algorithm>
#include <cmath>

#include "cttp/error.hpp"

namespace cttp::eval {

namespace {
std::vector<double> unit_rows(const FeatureSet& f) {
    std::vector<double> out(f.values.begin(), f.values.end());
    for (std::size_t i = 0; i < f.count(); ++i) {
        double ss = 0.0;
        for (std::size_t d = 0; d < f.dim; ++d) ss += out[i * f.dim + d] * out[i * f.dim + d];
        const double inv = ss > 0.0 ? 1.0 / std::sqrt(ss) : 0.0;
        for (std::size_t d = 0; d < f.dim; ++d) out[i * f.dim + d] *= inv;
    }
    return out;
}
} // namespace

double recall_at_1(const FeatureSet& query, const FeatureSet& gallery) {
    if (query.count() != gallery.count() || query.dim != gallery.dim) {
        throw ShapeError("retrieval: query and gallery must be paired row for row");
    }
    const std::size_t n = query.count(), dim = query.dim;
    if (n < 2) throw DataError("retrieval needs at least 2 pairs, got " + std::to_string(n));
    const auto q = unit_rows(query), g = unit_rows(gallery);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double best = -2.0;
        std::size_t arg = n;
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t d = 0; d < dim; ++d) s += q[i * dim + d] * g[j * dim + d];
            if (s > best) {
                best = s;
                arg = j;
            }
        }
        // A zero query scores 0 against everything and lands on row 0 by the
        // tie rule; count it as a miss so degenerate encoders score zero.
        const bool zero_query =
            std::all_of(q.begin() + i * dim, q.begin() + (i + 1) * dim, [](double v) { return v == 0.0; });
        hits += arg == i && !zero_query;
    }
    return double(hits) / double(n);
}

RetrievalResult retrieval_recall(const FeatureSet& membrane, const FeatureSet& gel) {
    if (membrane.sensor != SensorKind::membrane || gel.sensor != SensorKind::gel) {
        throw ShapeError("retrieval: expected membrane and gel feature sets");
    }
    RetrievalResult r;
    r.pairs = membrane.count();
    r.membrane_to_gel = recall_at_1(membrane, gel);
    r.gel_to_membrane = recall_at_1(gel, membrane);
    r.average = 0.5 * (r.membrane_to_gel + r.gel_to_membrane);
    return r;
}

RetrievalResult retrieval_recall(const model::DualEncoder<float>& encoder, std::span<const sim::PairedRecord> records) {
    if (records.size() < 2) throw DataError("retrieval needs at least 2 pairs, got " + std::to_string(records.size()));
    return retrieval_recall(extract_features(encoder, records, SensorKind::membrane, FeatureKind::projected),
                            extract_features(encoder, records, SensorKind::gel, FeatureKind::projected));
}

double chance_sigma(std::size_t n) {
    const double p = 1.0 / double(n);
    return std::sqrt(p * (1.0 - p) / double(n));
}

} // namespace cttp::eval
