#include "cttp/cli/commands.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include "cttp/cli/gradcheck_suite.hpp"
#include "cttp/dataio/checkpoint.hpp"
#include "cttp/dataio/manifest.hpp"
#include "cttp/error.hpp"

namespace cttp::cli {

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
    if (dynamic_cast<const DataError*>(&e)) return kExitData;
    if (dynamic_cast<const NumericError*>(&e)) return kExitNumeric;
    return kExitOther;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << text;
}

// Write-then-rename so an interrupted run never leaves a torn checkpoint.
void save_checkpoint_atomic(const ad::ParamList<float>& params, const fs::path& path) {
    auto tmp = path;
    tmp += ".tmp";
    io::save_checkpoint(params, tmp);
    fs::rename(tmp, path);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

sim::Dataset load_data(const fs::path& data) {
    if (!fs::exists(data / "manifest.json")) {
        throw DataError("no dataset at '" + data.string() + "' (run `cttp gen` first)");
    }
    return io::load_dataset(data);
}

void write_report(const fs::path& path, const io::EvalReport& report, const ExperimentConfig& config) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    io::write_json(path.string(), io::emit_report(report, config.eval.insertion_logs));
    auto cfg_path = path;
    cfg_path.replace_extension(".config.ini");
    write_resolved_config(cfg_path, config);
}

std::string eval_notes(const ExperimentConfig& c) {
    return "probes trained on " + to_string(c.eval.train_sensor) + " features; across-sensor cells evaluate on " +
           to_string(other_sensor(c.eval.train_sensor)) + " frames through the " +
           to_string(other_sensor(c.eval.train_sensor)) + " tower";
}

} // namespace

void write_resolved_config(const fs::path& path, const ExperimentConfig& config) {
    write_text(path, to_config_text(config));
}

sim::Dataset cmd_gen(const ExperimentConfig& config, const fs::path& out, bool force, std::ostream& log) {
    validate(config);
    if (fs::exists(out) && !fs::is_directory(out)) throw ConfigError("'" + out.string() + "' is not a directory");
    if (fs::exists(out) && !fs::is_empty(out) && !force) {
        throw ConfigError("output directory '" + out.string() + "' is not empty (use --force to overwrite)");
    }
    const auto t0 = std::chrono::steady_clock::now();
    auto ds = sim::generate_dataset(config.dataset);
    sim::check_disjoint(ds);
    io::write_dataset(out, ds);
    write_resolved_config(out / kResolvedConfigName, config);
    log << "gen: " << ds.total_records() << " records in " << std::size(sim::kSplitNames) << " splits -> "
        << out.string() << " (" << seconds_since(t0) << " s)\n";
    return ds;
}

pretrain::PretrainResult cmd_pretrain(const ExperimentConfig& config_in, const fs::path& data, const fs::path& out,
                                      std::ostream& log) {
    auto config = config_in;
    validate(config);
    const auto ds = load_data(data);
    config.dataset = ds.config;
    fs::create_directories(out);
    write_resolved_config(out / kResolvedConfigName, config);
    const auto mode = pretrain::to_string(config.pretrain.mode);
    const auto t0 = std::chrono::steady_clock::now();
    auto on_epoch = [&](std::size_t epoch, const pretrain::PretrainResult& r) {
        save_checkpoint_atomic(r.encoder.parameters(), out / kCheckpointName);
        if (epoch > 0) {
            log << mode << ": epoch " << epoch << "/" << config.pretrain.epochs << " loss " << r.epoch_losses.back()
                << " (" << seconds_since(t0) << " s)\n";
        }
    };
    auto result = pretrain::run_pretrain(config.pretrain, ds.split("pretrain"), on_epoch);
    save_checkpoint_atomic(result.encoder.parameters(), out / kCheckpointName);
    io::write_json((out / kLossTraceName).string(), pretrain::loss_trace_json(result));
    log << mode << ": " << result.step_losses.size() << " steps -> " << (out / kCheckpointName).string() << "\n";
    return result;
}

model::DualEncoder<float> load_encoder(const fs::path& path) {
    const auto file = fs::is_directory(path) ? path / kCheckpointName : path;
    if (!fs::exists(file)) throw DataError("checkpoint '" + file.string() + "' does not exist");
    const auto params = io::load_checkpoint(file);
    return model::DualEncoder<float>::from_parameters(params, model::infer_arch(params));
}

io::EvalReport cmd_eval(const ExperimentConfig& config_in, const EvalRequest& request, const fs::path& data,
                        const fs::path& report_path, std::ostream& log) {
    auto config = config_in;
    validate(config);
    const auto ds = load_data(data);
    config.dataset = ds.config;
    io::EvalReport report;
    if (request.cell) {
        if (request.checkpoints.size() != 1) {
            throw ConfigError("a single-cell evaluation takes exactly one --ckpt, got " +
                              std::to_string(request.checkpoints.size()));
        }
        const auto& [method, path] = *request.checkpoints.begin();
        const auto& cell = *request.cell;
        log << "eval: " << to_string(cell.task) << " " << method << " " << to_string(cell.split) << " "
            << to_string(cell.train_sensor) << " -> " << to_string(cell.eval_sensor) << "\n";
        report = eval::evaluate_cell(method, load_encoder(path), ds, cell, config.eval);
    } else {
        eval::Checkpoints encoders;
        for (const auto& [method, path] : request.checkpoints) encoders.emplace(method, load_encoder(path));
        const auto t0 = std::chrono::steady_clock::now();
        report = eval::full_eval(encoders, ds, config.eval, [&](const std::string& m) {
            log << "eval: " << m << " (" << seconds_since(t0) << " s)\n";
        });
    }
    report.notes.push_back(eval_notes(config));
    write_report(report_path, report, config);
    log << "eval: report -> " << report_path.string() << "\n";
    return report;
}

io::EvalReport cmd_sweep(const ExperimentConfig& config_in, const fs::path& data, const fs::path& out,
                         std::ostream& log) {
    auto config = config_in;
    config.pretrain.mode = pretrain::Mode::cttp;
    validate(config);
    for (auto s : config.sweep_sizes) {
        if (s < 2) throw ConfigError("batch sizes must be at least 2, got " + std::to_string(s));
    }
    const auto ds = load_data(data);
    config.dataset = ds.config;
    fs::create_directories(out);
    eval::SweepConfig sweep{config.sweep_sizes, config.pretrain, config.eval};
    const auto t0 = std::chrono::steady_clock::now();
    auto outcome = eval::batch_size_sweep(sweep, ds, [&](std::size_t bs) {
        log << "sweep: batch " << bs << " (" << seconds_since(t0) << " s)\n";
    });
    for (std::size_t i = 0; i < outcome.runs.size(); ++i) {
        const auto dir = out / ("batch-" + std::to_string(outcome.rows[i].batch_size));
        fs::create_directories(dir);
        auto run_config = config;
        run_config.pretrain.batch_size = outcome.rows[i].batch_size;
        save_checkpoint_atomic(outcome.runs[i].encoder.parameters(), dir / kCheckpointName);
        io::write_json((dir / kLossTraceName).string(), pretrain::loss_trace_json(outcome.runs[i]));
        write_resolved_config(dir / kResolvedConfigName, run_config);
    }
    io::EvalReport report;
    report.sweep = outcome.rows;
    report.notes = outcome.notes;
    report.notes.push_back(eval_notes(config));
    for (const auto& n : outcome.notes) log << "sweep: " << n << "\n";
    write_report(out / "sweep.json", report, config);
    return report;
}

std::vector<eval::ProjectionRow> cmd_project(const ExperimentConfig& config_in, const fs::path& checkpoint,
                                             const fs::path& data, eval::ProjectionMethod method,
                                             const fs::path& out_csv, std::ostream& log) {
    auto config = config_in;
    validate(config);
    const auto ds = load_data(data);
    config.dataset = ds.config;
    const auto encoder = load_encoder(checkpoint);
    const auto fx = eval::make_extractor(encoder, ds, config.eval);
    const auto t0 = std::chrono::steady_clock::now();
    auto rows = eval::project_2d(fx, ds.split("probe-test"), ds.split("unseen-tools-test"), method, config.tsne);
    if (out_csv.has_parent_path()) fs::create_directories(out_csv.parent_path());
    eval::write_projection_csv(out_csv, rows);
    auto cfg_path = out_csv;
    cfg_path.replace_extension(".config.ini");
    write_resolved_config(cfg_path, config);
    log << "project: " << to_string(method) << " " << rows.size() << " points -> " << out_csv.string() << " ("
        << seconds_since(t0) << " s)\n";
    return rows;
}

bool cmd_gradcheck(const std::optional<fs::path>& report, std::ostream& log) {
    const auto cases = run_gradcheck_suite();
    char line[160];
    for (const auto& c : cases) {
        std::snprintf(line, sizeof line, "%-26s %s  max rel error %.3e%s%s\n", c.name.c_str(),
                      c.report.passed ? "pass" : "FAIL", c.report.max_rel_error(), c.report.failure.empty() ? "" : "  ",
                      c.report.failure.c_str());
        log << line;
    }
    if (report) io::write_json(report->string(), gradcheck_json(cases));
    return all_passed(cases);
}

io::EvalReport cmd_paper(const ExperimentConfig& config, const fs::path& out, bool force, std::ostream& log) {
    validate(config);
    const auto data = out / "data";
    cmd_gen(config, data, force, log);
    EvalRequest request;
    for (auto mode : pretrain::kAllModes) {
        auto c = config;
        c.pretrain.mode = mode;
        const auto dir = out / "pretrain" / pretrain::to_string(mode);
        cmd_pretrain(c, data, dir, log);
        request.checkpoints[pretrain::to_string(mode)] = dir / kCheckpointName;
    }
    auto report = cmd_eval(config, request, data, out / "eval.json", log);
    const auto sweep = cmd_sweep(config, data, out / "sweep", log);
    eval::append(report, sweep);
    for (auto method : {eval::ProjectionMethod::pca, eval::ProjectionMethod::tsne}) {
        cmd_project(config, request.checkpoints.at("cttp"), data, method,
                    out / ("projection-cttp-" + to_string(method) + ".csv"), log);
    }
    write_report(out / "report.json", report, config);
    log << "paper: combined report -> " << (out / "report.json").string() << "\n";
    return report;
}

} // namespace cttp::cli
