#include "cttp/sensorsim/dataset.hpp"

#include <set>

#include "cttp/autodiff/rng.hpp"
#include "cttp/error.hpp"
#include "cttp/sensorsim/tools.hpp"

namespace cttp::sim {

std::vector<GraspSample> sample_grasps(const std::vector<std::uint32_t>& tool_ids, std::size_t n_per_tool,
                                       const GraspRanges& ranges, std::uint64_t seed,
                                       std::uint32_t first_grasp_id) {
    if (tool_ids.empty()) throw DataError("sample_grasps: empty tool list");
    if (n_per_tool == 0) throw DataError("sample_grasps: n_per_tool must be >= 1");
    Rng rng(seed);
    std::vector<GraspSample> out;
    out.reserve(tool_ids.size() * n_per_tool);
    std::uint32_t next_id = first_grasp_id;
    for (auto tool : tool_ids) {
        for (std::size_t i = 0; i < n_per_tool; ++i) {
            GraspSample g;
            g.tool_id = tool;
            g.grasp_id = next_id++;
            g.y = static_cast<float>(rng.uniform(ranges.y.min, ranges.y.max));
            g.z = static_cast<float>(rng.uniform(ranges.z.min, ranges.z.max));
            g.theta = static_cast<float>(rng.uniform(ranges.theta.min, ranges.theta.max));
            g.depth = static_cast<float>(rng.uniform(ranges.depth.min, ranges.depth.max));
            out.push_back(g);
        }
    }
    return out;
}

const std::vector<PairedRecord>& Dataset::split(const std::string& name) const {
    auto it = splits.find(name);
    if (it == splits.end()) throw DataError("dataset has no split '" + name + "'");
    return it->second;
}

std::size_t Dataset::total_records() const {
    std::size_t n = 0;
    for (const auto& [name, records] : splits) n += records.size();
    return n;
}

PairedRecord render_record(const GraspSample& grasp, const DatasetConfig& config) {
    const auto h = render_heightfield(grasp, tool_by_id(grasp.tool_id), config.contact);
    PairedRecord rec;
    rec.grasp = grasp;
    rec.gel = render_gel(h, config.gel, derive_seed(config.seed, "noise", 2ull * grasp.grasp_id));
    rec.membrane = render_membrane(h, config.membrane, derive_seed(config.seed, "noise", 2ull * grasp.grasp_id + 1));
    return rec;
}

Dataset generate_dataset(const DatasetConfig& config) {
    struct Plan {
        const char* name;
        std::vector<std::uint32_t> tools;
        std::size_t per_tool;
    };
    const std::vector<Plan> plans{
        {"pretrain", seen_tool_ids(), config.pretrain_per_tool},
        {"probe-train", seen_tool_ids(), config.probe_train_per_tool},
        {"probe-test", seen_tool_ids(), config.probe_test_per_tool},
        {"unseen-tools-train", unseen_tool_ids(), config.unseen_train_per_tool},
        {"unseen-tools-test", unseen_tool_ids(), config.unseen_test_per_tool},
    };

    Dataset ds;
    ds.config = config;
    std::uint32_t next_id = 0;
    for (const auto& plan : plans) {
        const auto grasps =
            sample_grasps(plan.tools, plan.per_tool, config.ranges, derive_seed(config.seed, "data", next_id), next_id);
        next_id += static_cast<std::uint32_t>(grasps.size());
        auto& records = ds.splits[plan.name];
        records.reserve(grasps.size());
        for (const auto& g : grasps) records.push_back(render_record(g, config));
    }
    check_disjoint(ds);
    return ds;
}

void check_disjoint(const Dataset& dataset) {
    std::set<std::uint32_t> seen;
    for (const auto& [name, records] : dataset.splits) {
        for (const auto& r : records) {
            if (!seen.insert(r.grasp.grasp_id).second) {
                throw DataError("grasp id " + std::to_string(r.grasp.grasp_id) + " appears more than once (split '" +
                                name + "')");
            }
        }
    }
}

} // namespace cttp::sim
