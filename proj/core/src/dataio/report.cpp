#include "cttp/dataio/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "cttp/error.hpp"

namespace cttp::io {

MeanStd mean_std(std::span<const double> values) {
    if (values.empty()) return {};
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / static_cast<double>(values.size()))};
}

std::string regime_label(const std::string& train_sensor, const std::string& eval_sensor) {
    return train_sensor == eval_sensor ? "within-sensor" : "across-sensor";
}

namespace {
nlohmann::json stat_json(const MeanStd& s) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f ± %.2f", s.mean, s.std);
    return {{"mean", s.mean}, {"std", s.std}, {"display", buf}};
}
} // namespace

nlohmann::json emit_report(const EvalReport& report, bool include_trial_logs) {
    if (report.empty()) throw DataError("emit_report: no results to report");
    nlohmann::json out;
    out["schema"] = "cttp-report/1";
    out["std"] = "population";

    auto& cls = out["classification"] = nlohmann::json::array();
    for (const auto& c : report.classification) {
        cls.push_back({{"task", "class"},
                       {"method", c.method},
                       {"split", c.split},
                       {"regime", regime_label(c.train_sensor, c.eval_sensor)},
                       {"train_sensor", c.train_sensor},
                       {"eval_sensor", c.eval_sensor},
                       {"classes", c.classes},
                       {"chance", c.classes ? 1.0 / static_cast<double>(c.classes) : 0.0},
                       {"top1", c.top1},
                       {"correct", c.correct},
                       {"total", c.total}});
    }
    auto& pose = out["pose"] = nlohmann::json::array();
    for (const auto& p : report.pose) {
        pose.push_back({{"task", "pose"},
                        {"method", p.method},
                        {"split", p.split},
                        {"regime", regime_label(p.train_sensor, p.eval_sensor)},
                        {"train_sensor", p.train_sensor},
                        {"eval_sensor", p.eval_sensor},
                        {"y_error_mm", stat_json(p.y)},
                        {"z_error_mm", stat_json(p.z)},
                        {"theta_error_deg", stat_json(p.theta)},
                        {"within_translation_tol", p.within_translation},
                        {"within_rotation_tol", p.within_rotation},
                        {"translation_tol_mm", p.translation_tol},
                        {"rotation_tol_deg", p.rotation_tol},
                        {"count", p.count}});
    }
    auto& ret = out["retrieval"] = nlohmann::json::array();
    for (const auto& r : report.retrieval) {
        ret.push_back({{"task", "retrieval"},
                       {"method", r.method},
                       {"split", r.split},
                       {"recall_at_1_membrane_to_gel", r.membrane_to_gel},
                       {"recall_at_1_gel_to_membrane", r.gel_to_membrane},
                       {"recall_at_1", r.average},
                       {"pairs", r.pairs},
                       {"chance", r.pairs ? 1.0 / static_cast<double>(r.pairs) : 0.0}});
    }
    auto& ins = out["insertion"] = nlohmann::json::array();
    for (const auto& c : report.insertion) {
        nlohmann::json cell{{"task", "insertion"},
                            {"method", c.method},
                            {"split", c.split},
                            {"regime", regime_label(c.train_sensor, c.eval_sensor)},
                            {"train_sensor", c.train_sensor},
                            {"eval_sensor", c.eval_sensor},
                            {"trials", c.trials},
                            {"class_correct", c.class_correct},
                            {"pose_within_tolerance", c.pose_ok},
                            {"successes", c.successes},
                            {"success_rate", c.success_rate}};
        if (include_trial_logs) {
            auto& log = cell["log"] = nlohmann::json::array();
            for (const auto& t : c.log) {
                log.push_back({{"grasp_id", t.grasp_id},
                               {"tool_id", t.tool_id},
                               {"predicted_tool", t.predicted_tool},
                               {"dy_mm", t.dy},
                               {"dz_mm", t.dz},
                               {"dtheta_deg", t.dtheta},
                               {"class_ok", t.class_ok},
                               {"pose_ok", t.pose_ok},
                               {"success", t.success}});
            }
        }
        ins.push_back(std::move(cell));
    }
    auto& sweep = out["sweep"] = nlohmann::json::array();
    for (const auto& s : report.sweep) {
        sweep.push_back({{"batch_size", s.batch_size},
                         {"within_top1", s.within_top1},
                         {"across_top1", s.across_top1},
                         {"recall_at_1", s.recall_at_1}});
    }
    out["notes"] = report.notes;
    return out;
}

void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

} // namespace cttp::io
