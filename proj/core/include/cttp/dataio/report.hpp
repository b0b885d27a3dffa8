#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace cttp::io {

/// Arithmetic mean and population standard deviation (divides by n).
struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};
MeanStd mean_std(std::span<const double> values);

// Cell structs below are the report schema. `split` is "unseen-grasps" or
// "unseen-tools"; the regime label is derived from the two sensors.

struct ClassCell {
    std::string method;
    std::string split;
    std::string train_sensor;
    std::string eval_sensor;
    std::size_t classes = 0;
    std::size_t correct = 0;
    std::size_t total = 0;
    double top1 = 0.0;
};

struct PoseCell {
    std::string method;
    std::string split;
    std::string train_sensor;
    std::string eval_sensor;
    MeanStd y;     // mm
    MeanStd z;     // mm
    MeanStd theta; // degrees
    double within_translation = 0.0; // fraction with |dy|,|dz| <= translation_tol
    double within_rotation = 0.0;    // fraction with |dtheta| <= rotation_tol
    double translation_tol = 3.0;
    double rotation_tol = 5.0;
    std::size_t count = 0;
};

struct RetrievalCell {
    std::string method;
    std::string split;
    double membrane_to_gel = 0.0;
    double gel_to_membrane = 0.0;
    double average = 0.0;
    std::size_t pairs = 0;
};

struct InsertionTrial {
    std::uint32_t grasp_id = 0;
    std::uint32_t tool_id = 0;
    std::uint32_t predicted_tool = 0;
    double dy = 0.0, dz = 0.0, dtheta = 0.0;
    bool class_ok = false;
    bool pose_ok = false;
    bool success = false;
};

struct InsertionCell {
    std::string method;
    std::string split;
    std::string train_sensor;
    std::string eval_sensor;
    std::size_t trials = 0;
    std::size_t class_correct = 0;
    std::size_t pose_ok = 0;
    std::size_t successes = 0;
    double success_rate = 0.0;
    std::vector<InsertionTrial> log;
};

struct SweepRow {
    std::size_t batch_size = 0;
    double within_top1 = 0.0;
    double across_top1 = 0.0;
    double recall_at_1 = 0.0;
};

struct EvalReport {
    std::vector<ClassCell> classification;
    std::vector<PoseCell> pose;
    std::vector<RetrievalCell> retrieval;
    std::vector<InsertionCell> insertion;
    std::vector<SweepRow> sweep;
    std::vector<std::string> notes;

    bool empty() const {
        return classification.empty() && pose.empty() && retrieval.empty() && insertion.empty() && sweep.empty();
    }
};

std::string regime_label(const std::string& train_sensor, const std::string& eval_sensor);

/// Serializes a report; throws DataError for an empty result set.
nlohmann::json emit_report(const EvalReport& report, bool include_trial_logs = true);

void write_json(const std::string& path, const nlohmann::json& j);

} // namespace cttp::io
