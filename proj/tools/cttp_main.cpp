#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cttp/cli/commands.hpp"
#include "cttp/error.hpp"

namespace {

using namespace cttp;
namespace fs = std::filesystem;

struct Common {
    std::string config_file;
    std::vector<std::string> overrides; // section.key=value
};

cli::ExperimentConfig resolve(const Common& common) {
    cli::ExperimentConfig cfg;
    if (!common.config_file.empty()) cli::apply_config_file(cfg, common.config_file);
    cli::apply_env(cfg);
    for (const auto& o : common.overrides) {
        const auto eq = o.find('='), dot = o.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
            throw ConfigError("--set expects section.key=value, got '" + o + "'");
        }
        cli::set_value(cfg, o.substr(0, dot), o.substr(dot + 1, eq - dot - 1), o.substr(eq + 1));
    }
    return cfg;
}

// Flag values land in optionals and are applied after the file and the
// environment, so flags win.
template <class T>
void apply(std::optional<T>& flag, cli::ExperimentConfig& cfg, const char* section, const char* key) {
    if (!flag) return;
    if constexpr (std::is_same_v<T, std::string>) cli::set_value(cfg, section, key, *flag);
    else cli::set_value(cfg, section, key, std::to_string(*flag));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Contrastive touch-to-touch pretraining on a synthetic two-sensor benchmark"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--config", common.config_file, "sectioned key = value config file (see `cttp config`)")
        ->check(CLI::ExistingFile);
    app.add_option("--set", common.overrides, "override one key, e.g. --set pretrain.epochs=5 (repeatable)");

    auto* config_cmd = app.add_subcommand("config", "print the resolved configuration with every key documented");

    auto* gen = app.add_subcommand("gen", "render the paired synthetic dataset");
    fs::path gen_out;
    bool gen_force = false;
    std::optional<std::uint64_t> gen_seed;
    gen->add_option("--out", gen_out, "dataset directory")->required();
    gen->add_flag("--force", gen_force, "overwrite a non-empty output directory");
    gen->add_option("--seed", gen_seed, "dataset.seed");

    auto* pre = app.add_subcommand("pretrain", "pretrain one encoder pair");
    std::optional<std::string> pre_mode;
    fs::path pre_data, pre_out;
    std::optional<std::size_t> pre_epochs, pre_batch;
    std::optional<double> pre_lr;
    std::optional<std::uint64_t> pre_seed;
    pre->add_option("--mode", pre_mode, "cttp, recon, sup-class, sup-pose or random");
    pre->add_option("--data", pre_data, "dataset directory")->required();
    pre->add_option("--out", pre_out, "run directory")->required();
    pre->add_option("--epochs", pre_epochs, "pretrain.epochs");
    pre->add_option("--batch-size", pre_batch, "pretrain.batch_size");
    pre->add_option("--lr", pre_lr, "pretrain.lr");
    pre->add_option("--seed", pre_seed, "pretrain.seed");

    auto* ev = app.add_subcommand("eval", "probe evaluation, retrieval and insertion gate");
    std::vector<std::string> ev_ckpts;
    std::optional<fs::path> ev_root;
    fs::path ev_data, ev_report;
    std::optional<std::string> ev_task, ev_train, ev_eval, ev_split;
    ev->add_option("--ckpt", ev_ckpts, "method=checkpoint (repeatable); a bare path means method 'model'");
    ev->add_option("--ckpt-root", ev_root, "directory with one <method>/checkpoint.ckpt per pretrain mode");
    ev->add_option("--data", ev_data, "dataset directory")->required();
    ev->add_option("--report", ev_report, "report JSON path")->required();
    ev->add_option("--task", ev_task, "single cell: class, pose, insertion or retrieval");
    ev->add_option("--train-sensor", ev_train, "single cell: probe training sensor (default eval.train_sensor)");
    ev->add_option("--eval-sensor", ev_eval, "single cell: evaluation sensor (default: the other sensor)");
    ev->add_option("--split", ev_split, "single cell: unseen-grasps (default) or unseen-tools");

    auto* sw = app.add_subcommand("sweep", "cttp batch-size sweep");
    std::optional<std::string> sw_sizes;
    fs::path sw_data, sw_out;
    sw->add_option("--sizes", sw_sizes, "comma separated batch sizes, e.g. 8,32,128,256");
    sw->add_option("--data", sw_data, "dataset directory")->required();
    sw->add_option("--out", sw_out, "sweep directory")->required();

    auto* pr = app.add_subcommand("project", "2-D projection CSV of the test splits");
    fs::path pr_ckpt, pr_data, pr_out;
    std::string pr_method = "tsne";
    pr->add_option("--ckpt", pr_ckpt, "checkpoint file or run directory")->required();
    pr->add_option("--data", pr_data, "dataset directory")->required();
    pr->add_option("--method", pr_method, "pca or tsne")->capture_default_str();
    pr->add_option("--out", pr_out, "CSV path")->required();

    auto* gc = app.add_subcommand("gradcheck", "finite-difference check of every op, layer and loss");
    std::optional<fs::path> gc_report;
    gc->add_option("--report", gc_report, "write the per-case JSON report here");

    auto* paper = app.add_subcommand("paper", "full desk-scale comparison: gen, pretrain x5, eval, sweep, projections");
    fs::path paper_out;
    bool paper_force = false;
    paper->add_option("--out", paper_out, "output directory")->required();
    paper->add_flag("--force", paper_force, "overwrite an existing dataset under --out");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? cli::kExitOk : cli::kExitConfig;
    }

    try {
        auto cfg = resolve(common);
        auto& log = std::cerr;
        if (config_cmd->parsed()) {
            cli::validate(cfg);
            std::cout << cli::to_config_text(cfg);
        } else if (gen->parsed()) {
            apply(gen_seed, cfg, "dataset", "seed");
            cli::cmd_gen(cfg, gen_out, gen_force, log);
        } else if (pre->parsed()) {
            apply(pre_mode, cfg, "pretrain", "mode");
            apply(pre_epochs, cfg, "pretrain", "epochs");
            apply(pre_batch, cfg, "pretrain", "batch_size");
            apply(pre_seed, cfg, "pretrain", "seed");
            if (pre_lr) cfg.pretrain.lr = *pre_lr;
            cli::cmd_pretrain(cfg, pre_data, pre_out, log);
        } else if (ev->parsed()) {
            cli::EvalRequest req;
            if (ev_root) {
                for (auto m : pretrain::kAllModes) {
                    req.checkpoints[pretrain::to_string(m)] = *ev_root / pretrain::to_string(m);
                }
            }
            for (const auto& c : ev_ckpts) {
                const auto eq = c.find('=');
                if (eq == std::string::npos) req.checkpoints["model"] = c;
                else req.checkpoints[c.substr(0, eq)] = c.substr(eq + 1);
            }
            if (req.checkpoints.empty()) throw ConfigError("eval needs --ckpt or --ckpt-root");
            if (ev_task) {
                eval::CellRequest cell;
                cell.task = eval::parse_task(*ev_task);
                cell.split = ev_split ? eval::parse_split(*ev_split) : eval::Split::unseen_grasps;
                cell.train_sensor = ev_train ? parse_sensor(*ev_train) : cfg.eval.train_sensor;
                cell.eval_sensor = ev_eval ? parse_sensor(*ev_eval) : other_sensor(cell.train_sensor);
                req.cell = cell;
            } else if (ev_train || ev_eval || ev_split) {
                throw ConfigError("--train-sensor, --eval-sensor and --split select a single cell and need --task");
            }
            cli::cmd_eval(cfg, req, ev_data, ev_report, log);
        } else if (sw->parsed()) {
            apply(sw_sizes, cfg, "sweep", "sizes");
            cli::cmd_sweep(cfg, sw_data, sw_out, log);
        } else if (pr->parsed()) {
            cli::cmd_project(cfg, pr_ckpt, pr_data, eval::parse_projection_method(pr_method), pr_out, log);
        } else if (gc->parsed()) {
            if (!cli::cmd_gradcheck(gc_report, std::cout)) {
                std::cerr << "gradcheck: failures above\n";
                return cli::kExitNumeric;
            }
        } else if (paper->parsed()) {
            cli::cmd_paper(cfg, paper_out, paper_force, log);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::exit_code_for(e);
    }
    return cli::kExitOk;
}
