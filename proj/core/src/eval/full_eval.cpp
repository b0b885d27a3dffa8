#include "cttp/eval/full_eval.hpp"

#include <algorithm>

#include <cmath>
#include <sstream>

#include "cttp/error.hpp"
#include "cttp/eval/retrieval.hpp"

namespace cttp::eval {

io::InsertionCell insertion_gate(const ClassProbe& cp, const PoseProbe& pp, const FeatureSet& test,
                                 const InsertionTolerances& tol) {
    if (cp.tools.empty() || cp.head.linear.weight.numel() == 0) throw DataError("insertion gate: missing class probe");
    if (pp.head.l1.weight.numel() == 0) throw DataError("insertion gate: missing pose probe");
    if (cp.trained_on != pp.trained_on) throw DataError("insertion gate: probes trained on different sensors");
    if (test.count() == 0) throw DataError("insertion gate: empty test set");
    const auto tools = cp.predict(test);
    const auto poses = pp.predict(test);
    io::InsertionCell cell;
    cell.train_sensor = to_string(cp.trained_on);
    cell.eval_sensor = to_string(test.sensor);
    cell.trials = test.count();
    for (std::size_t i = 0; i < test.count(); ++i) {
        const auto& g = test.grasps[i];
        io::InsertionTrial t;
        t.grasp_id = g.grasp_id;
        t.tool_id = g.tool_id;
        t.predicted_tool = tools[i];
        t.dy = poses[i][0] - g.y;
        t.dz = poses[i][1] - g.z;
        t.dtheta = poses[i][2] - g.theta;
        t.class_ok = t.predicted_tool == t.tool_id;
        t.pose_ok = std::abs(t.dy) <= tol.translation_mm && std::abs(t.dz) <= tol.translation_mm &&
                    std::abs(t.dtheta) <= tol.rotation_deg;
        t.success = t.class_ok && t.pose_ok;
        cell.class_correct += t.class_ok;
        cell.pose_ok += t.pose_ok;
        cell.successes += t.success;
        cell.log.push_back(t);
    }
    cell.success_rate = double(cell.successes) / double(cell.trials);
    return cell;
}

Task parse_task(const std::string& name) {
    if (name == "class") return Task::classification;
    if (name == "pose") return Task::pose;
    if (name == "insertion") return Task::insertion;
    if (name == "retrieval") return Task::retrieval;
    throw ConfigError("unknown task '" + name + "' (expected class, pose, insertion or retrieval)");
}

std::string to_string(Task task) {
    switch (task) {
    case Task::classification: return "class";
    case Task::pose: return "pose";
    case Task::insertion: return "insertion";
    case Task::retrieval: return "retrieval";
    }
    return "?";
}

Split parse_split(const std::string& name) {
    if (name == "unseen-grasps") return Split::unseen_grasps;
    if (name == "unseen-tools") return Split::unseen_tools;
    throw ConfigError("unknown split '" + name + "' (expected unseen-grasps or unseen-tools)");
}

std::string to_string(Split split) { return split == Split::unseen_grasps ? "unseen-grasps" : "unseen-tools"; }
std::string train_split_name(Split split) {
    return split == Split::unseen_grasps ? "probe-train" : "unseen-tools-train";
}
std::string test_split_name(Split split) { return split == Split::unseen_grasps ? "probe-test" : "unseen-tools-test"; }

FeatureExtractor make_extractor(const model::DualEncoder<float>& encoder, const sim::Dataset& dataset,
                                const EvalConfig& config) {
    const auto which = config.probes.features;
    return config.standardize ? FeatureExtractor::fit(encoder, dataset.split("pretrain"), which)
                              : FeatureExtractor::raw(encoder, which);
}

namespace {

io::ClassCell class_cell(const std::string& method, Split split, const ClassProbe& probe, const FeatureSet& test) {
    const auto r = evaluate_class_probe(probe, test);
    return {method, to_string(split), to_string(probe.trained_on), to_string(test.sensor), r.classes, r.correct,
            r.total, r.top1};
}

io::PoseCell pose_cell(const std::string& method, Split split, const PoseProbe& probe, const FeatureSet& test,
                       const InsertionTolerances& tol) {
    const auto s = summarize_pose_errors(probe.predict(test), test.grasps, tol.translation_mm, tol.rotation_deg);
    return {method,
            to_string(split),
            to_string(probe.trained_on),
            to_string(test.sensor),
            s.y,
            s.z,
            s.theta,
            s.within_translation,
            s.within_rotation,
            s.translation_tol,
            s.rotation_tol,
            s.count};
}

io::RetrievalCell retrieval_cell(const std::string& method, Split split, const model::DualEncoder<float>& encoder,
                                 const sim::Dataset& dataset) {
    const auto r = retrieval_recall(encoder, dataset.split(test_split_name(split)));
    return {method, to_string(split), r.membrane_to_gel, r.gel_to_membrane, r.average, r.pairs};
}

void check_split(const sim::Dataset& dataset, const std::string& name) {
    if (!dataset.splits.count(name) || dataset.split(name).empty()) {
        throw DataError("dataset has no records in split '" + name + "'");
    }
}

} // namespace

io::EvalReport evaluate_cell(const std::string& method, const model::DualEncoder<float>& encoder,
                             const sim::Dataset& dataset, const CellRequest& req, const EvalConfig& config) {
    io::EvalReport report;
    check_split(dataset, test_split_name(req.split));
    if (req.task == Task::retrieval) {
        report.retrieval.push_back(retrieval_cell(method, req.split, encoder, dataset));
        return report;
    }
    check_split(dataset, train_split_name(req.split));
    const auto fx = make_extractor(encoder, dataset, config);
    const auto train = fx(dataset.split(train_split_name(req.split)), req.train_sensor);
    const auto test = fx(dataset.split(test_split_name(req.split)), req.eval_sensor);
    switch (req.task) {
    case Task::classification:
        report.classification.push_back(class_cell(method, req.split, train_class_probe(train, config.probes), test));
        break;
    case Task::pose:
        report.pose.push_back(
            pose_cell(method, req.split, train_pose_probe(train, config.probes), test, config.tolerances));
        break;
    case Task::insertion: {
        auto cell = insertion_gate(train_class_probe(train, config.probes), train_pose_probe(train, config.probes),
                                   test, config.tolerances);
        cell.method = method;
        cell.split = to_string(req.split);
        if (!config.insertion_logs) cell.log.clear();
        report.insertion.push_back(std::move(cell));
        break;
    }
    case Task::retrieval: break;
    }
    return report;
}

io::EvalReport evaluate_method(const std::string& method, const model::DualEncoder<float>& encoder,
                               const sim::Dataset& dataset, const EvalConfig& config) {
    io::EvalReport report;
    const auto fx = make_extractor(encoder, dataset, config);
    const SensorKind train_sensor = config.train_sensor;
    const SensorKind across = other_sensor(train_sensor);
    for (auto split : {Split::unseen_grasps, Split::unseen_tools}) {
        check_split(dataset, train_split_name(split));
        check_split(dataset, test_split_name(split));
        const auto train = fx(dataset.split(train_split_name(split)), train_sensor);
        const auto test_within = fx(dataset.split(test_split_name(split)), train_sensor);
        const auto test_across = fx(dataset.split(test_split_name(split)), across);
        const auto cp = train_class_probe(train, config.probes);
        const auto pp = train_pose_probe(train, config.probes);
        report.classification.push_back(class_cell(method, split, cp, test_within));
        report.classification.push_back(class_cell(method, split, cp, test_across));
        report.pose.push_back(pose_cell(method, split, pp, test_within, config.tolerances));
        report.pose.push_back(pose_cell(method, split, pp, test_across, config.tolerances));
        if (split == Split::unseen_tools) {
            auto cell = insertion_gate(cp, pp, test_across, config.tolerances);
            cell.method = method;
            cell.split = to_string(split);
            if (!config.insertion_logs) cell.log.clear();
            report.insertion.push_back(std::move(cell));
        }
    }
    report.retrieval.push_back(retrieval_cell(method, Split::unseen_grasps, encoder, dataset));
    return report;
}

void append(io::EvalReport& into, const io::EvalReport& from) {
    auto cat = [](auto& a, const auto& b) { a.insert(a.end(), b.begin(), b.end()); };
    cat(into.classification, from.classification);
    cat(into.pose, from.pose);
    cat(into.retrieval, from.retrieval);
    cat(into.insertion, from.insertion);
    cat(into.sweep, from.sweep);
    for (const auto& note : from.notes) {
        if (std::find(into.notes.begin(), into.notes.end(), note) == into.notes.end()) into.notes.push_back(note);
    }
}

io::EvalReport full_eval(const Checkpoints& checkpoints, const sim::Dataset& dataset, const EvalConfig& config,
                         const std::function<void(const std::string&)>& on_method) {
    std::vector<std::string> missing;
    for (auto m : pretrain::kAllModes) {
        if (!checkpoints.count(pretrain::to_string(m))) missing.push_back(pretrain::to_string(m));
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
        throw DataError("full evaluation needs a checkpoint for every method; missing: " + list);
    }
    io::EvalReport report;
    for (auto m : pretrain::kAllModes) {
        const auto name = pretrain::to_string(m);
        if (on_method) on_method(name);
        append(report, evaluate_method(name, checkpoints.at(name), dataset, config));
    }
    return report;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = text.find(',', pos);
        const auto item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos || item.size() > 9) {
            throw ConfigError("invalid batch size list '" + text + "'");
        }
        const auto v = std::stoul(item);
        if (v < 2) throw ConfigError("batch sizes must be at least 2, got " + item);
        out.push_back(v);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

SweepOutcome batch_size_sweep(const SweepConfig& config, const sim::Dataset& dataset,
                              const std::function<void(std::size_t)>& on_size) {
    if (config.sizes.empty()) throw ConfigError("sweep needs at least one batch size");
    if (config.base.mode != pretrain::Mode::cttp) throw ConfigError("batch size sweep trains cttp models only");
    for (auto s : config.sizes) {
        if (s < 2) throw ConfigError("batch sizes must be at least 2, got " + std::to_string(s));
    }
    SweepOutcome out;
    for (auto size : config.sizes) {
        if (on_size) on_size(size);
        auto cfg = config.base;
        cfg.batch_size = size;
        auto run = pretrain::pretrain_cttp(cfg, dataset.split("pretrain"));
        const auto fx = make_extractor(run.encoder, dataset, config.eval);
        const auto split = Split::unseen_grasps;
        const auto train = fx(dataset.split(train_split_name(split)), config.eval.train_sensor);
        const auto cp = train_class_probe(train, config.eval.probes);
        io::SweepRow row;
        row.batch_size = size;
        row.within_top1 = evaluate_class_probe(cp, fx(dataset.split(test_split_name(split)), config.eval.train_sensor)).top1;
        row.across_top1 =
            evaluate_class_probe(cp, fx(dataset.split(test_split_name(split)), other_sensor(config.eval.train_sensor)))
                .top1;
        row.recall_at_1 = retrieval_recall(run.encoder, dataset.split(test_split_name(split))).average;
        out.rows.push_back(row);
        out.runs.push_back(std::move(run));
    }
    auto find = [&](std::size_t s) -> const io::SweepRow* {
        for (const auto& r : out.rows) {
            if (r.batch_size == s) return &r;
        }
        return nullptr;
    };
    auto expect = [&](std::size_t a, std::size_t b, const char* relation) {
        const auto *ra = find(a), *rb = find(b);
        if (!ra || !rb) return;
        const bool holds = std::string(relation) == "<" ? ra->recall_at_1 < rb->recall_at_1
                                                        : ra->recall_at_1 <= rb->recall_at_1;
        std::ostringstream note;
        note << "expected recall@1(batch " << a << ") " << relation << " recall@1(batch " << b
             << "): " << ra->recall_at_1 << " vs " << rb->recall_at_1 << (holds ? " (holds)" : " (does not hold)");
        out.notes.push_back(note.str());
    };
    expect(8, 128, "<");
    expect(256, 128, "<=");
    return out;
}

} // namespace cttp::eval
