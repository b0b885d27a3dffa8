#pragma once

#include <span>

#include "cttp/eval/probes.hpp"

namespace cttp::eval {

struct RetrievalResult {
    double membrane_to_gel = 0.0;
    double gel_to_membrane = 0.0;
    double average = 0.0;
    std::size_t pairs = 0;
};

/// Fraction of rows of `query` whose cosine nearest neighbour among the
/// rows of `gallery` is the row with the same index. Ties go to the lower
/// index. Zero rows never match anything.
double recall_at_1(const FeatureSet& query, const FeatureSet& gallery);

/// Both directions over paired feature sets. DataError below 2 pairs.
RetrievalResult retrieval_recall(const FeatureSet& membrane, const FeatureSet& gel);

/// Projected embeddings of both sensors' frames of a paired split.
RetrievalResult retrieval_recall(const model::DualEncoder<float>& encoder, std::span<const sim::PairedRecord> records);

/// Binomial standard deviation of recall@1 under chance 1/n.
double chance_sigma(std::size_t n);

} // namespace cttp::eval
