#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cttp/dataio/report.hpp"
#include "cttp/eval/probes.hpp"
#include "cttp/pretrain/pretrain.hpp"
#include "cttp/sensorsim/dataset.hpp"

namespace cttp::eval {

struct InsertionTolerances {
    double translation_mm = 3.0;
    double rotation_deg = 5.0;
};

/// Per test record: success iff the predicted tool is right and
/// |dy|, |dz| <= translation and |dtheta| <= rotation. The probes must come
/// from the same training sensor; `test` may be either sensor.
io::InsertionCell insertion_gate(const ClassProbe& class_probe, const PoseProbe& pose_probe, const FeatureSet& test,
                                 const InsertionTolerances& tolerances = {});

enum class Task { classification, pose, insertion, retrieval };
Task parse_task(const std::string& name); // class|pose|insertion|retrieval
std::string to_string(Task task);

enum class Split { unseen_grasps, unseen_tools };
Split parse_split(const std::string& name); // unseen-grasps|unseen-tools
std::string to_string(Split split);
std::string train_split_name(Split split); // probe-train | unseen-tools-train
std::string test_split_name(Split split);  // probe-test | unseen-tools-test

struct EvalConfig {
    ProbeConfig probes;
    SensorKind train_sensor = SensorKind::membrane;
    InsertionTolerances tolerances;
    // Standardize probe inputs per sensor with statistics of the unlabeled
    // pretrain split; false feeds raw features.
    bool standardize = true;
    bool insertion_logs = true;
};

struct CellRequest {
    Task task = Task::classification;
    Split split = Split::unseen_grasps;
    SensorKind train_sensor = SensorKind::membrane;
    SensorKind eval_sensor = SensorKind::gel;
};

/// The feature map every probe of one checkpoint sees.
FeatureExtractor make_extractor(const model::DualEncoder<float>& encoder, const sim::Dataset& dataset,
                                const EvalConfig& config);

/// One (task, split, train sensor, eval sensor) cell. Retrieval ignores the
/// sensors and uses the split's test records.
io::EvalReport evaluate_cell(const std::string& method, const model::DualEncoder<float>& encoder,
                             const sim::Dataset& dataset, const CellRequest& request, const EvalConfig& config);

/// Class and pose probes in all four regimes (within/across x unseen
/// grasps/tools), retrieval on probe-test and the cross-sensor insertion
/// gate on unseen-tools-test.
io::EvalReport evaluate_method(const std::string& method, const model::DualEncoder<float>& encoder,
                               const sim::Dataset& dataset, const EvalConfig& config);

using Checkpoints = std::map<std::string, model::DualEncoder<float>>;

/// Requires a checkpoint for every pretrain mode; DataError lists the
/// missing ones. Methods appear in the order cttp, recon, sup-class,
/// sup-pose, random.
io::EvalReport full_eval(const Checkpoints& checkpoints, const sim::Dataset& dataset, const EvalConfig& config,
                         const std::function<void(const std::string&)>& on_method = {});

void append(io::EvalReport& into, const io::EvalReport& from);

/// Strictly parsed comma separated batch sizes, e.g. "8,32,128,256".
std::vector<std::size_t> parse_sizes(const std::string& text);

struct SweepConfig {
    std::vector<std::size_t> sizes{8, 32, 128, 256};
    pretrain::PretrainConfig base; // mode must be cttp
    EvalConfig eval;
};

struct SweepOutcome {
    std::vector<io::SweepRow> rows;
    std::vector<pretrain::PretrainResult> runs;
    std::vector<std::string> notes;
};

/// One CTTP run per size with the base seed, each evaluated by the
/// unseen-grasps class probe (within and across) and probe-test retrieval.
SweepOutcome batch_size_sweep(const SweepConfig& config, const sim::Dataset& dataset,
                              const std::function<void(std::size_t batch_size)>& on_size = {});

} // namespace cttp::eval
