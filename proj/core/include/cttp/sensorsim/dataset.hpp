#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cttp/sensorsim/records.hpp"
#include "cttp/sensorsim/render.hpp"

namespace cttp::sim {

struct Range {
    double min = 0.0;
    double max = 0.0;
};

struct GraspRanges {
    Range y{-8.0, 8.0};
    Range z{-8.0, 8.0};
    Range theta{-30.0, 30.0};
    Range depth{0.5, 2.0};
};

/// Uniform i.i.d. grasps, n_per_tool for each tool in order, grasp ids
/// first_grasp_id, first_grasp_id + 1, ...
std::vector<GraspSample> sample_grasps(const std::vector<std::uint32_t>& tool_ids, std::size_t n_per_tool,
                                       const GraspRanges& ranges, std::uint64_t seed,
                                       std::uint32_t first_grasp_id = 0);

inline constexpr const char* kSplitNames[] = {"pretrain", "probe-train", "probe-test", "unseen-tools-train",
                                              "unseen-tools-test"};

struct DatasetConfig {
    std::uint64_t seed = 7;
    std::size_t pretrain_per_tool = 200;
    std::size_t probe_train_per_tool = 100;
    std::size_t probe_test_per_tool = 50;
    std::size_t unseen_train_per_tool = 100;
    std::size_t unseen_test_per_tool = 50;
    GraspRanges ranges;
    ContactParams contact;
    MembraneParams membrane;
    GelParams gel;
};

struct Dataset {
    DatasetConfig config;
    std::map<std::string, std::vector<PairedRecord>> splits;

    const std::vector<PairedRecord>& split(const std::string& name) const;
    std::size_t total_records() const;
};

/// Both frames of a record come from one GraspSample; each frame's noise
/// uses its own substream keyed by (seed, grasp id, sensor).
PairedRecord render_record(const GraspSample& grasp, const DatasetConfig& config);

Dataset generate_dataset(const DatasetConfig& config);

/// Throws DataError if any (tool_id, grasp_id) or grasp_id appears in two splits.
void check_disjoint(const Dataset& dataset);

} // namespace cttp::sim
