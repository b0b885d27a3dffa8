#include "cttp/cli/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "cttp/error.hpp"

namespace cttp::cli {

namespace {

std::string fmt(double v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, r.ptr};
}
std::string fmt(std::uint64_t v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

template <class T>
T parse_number(const std::string& key, const std::string& text) {
    T v{};
    const auto* end = text.data() + text.size();
    auto r = std::from_chars(text.data(), end, v);
    if (text.empty() || r.ec != std::errc{} || r.ptr != end) {
        throw ConfigError(key + ": cannot parse '" + text + "' as a number");
    }
    return v;
}
bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

struct Entry {
    ConfigKey id;
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, const std::string&)> set;
};

template <class Field>
Entry number(std::string section, std::string key, std::string doc, Field field) {
    using T = std::remove_cvref_t<decltype(field(std::declval<ExperimentConfig&>()))>;
    const std::string full = section + "." + key;
    return {{section, key, doc},
            [field](const ExperimentConfig& c) {
                if constexpr (std::is_floating_point_v<T>) return fmt(double(field(c)));
                else return fmt(std::uint64_t(field(c)));
            },
            [field, full](ExperimentConfig& c, const std::string& v) { field(c) = parse_number<T>(full, v); }};
}

template <class Field>
Entry boolean(std::string section, std::string key, std::string doc, Field field) {
    const std::string full = section + "." + key;
    return {{section, key, doc},
            [field](const ExperimentConfig& c) { return fmt(bool(field(c))); },
            [field, full](ExperimentConfig& c, const std::string& v) { field(c) = parse_bool(full, v); }};
}

// Accessor usable on both const and mutable configs.
#define FIELD(expr) [](auto& c) -> auto& { return expr; }

std::vector<Entry> build_entries() {
    std::vector<Entry> e;
    // dataset
    e.push_back(number("dataset", "seed", "master seed for grasp sampling and sensor noise", FIELD(c.dataset.seed)));
    e.push_back(number("dataset", "pretrain_per_tool", "grasps per seen tool in the pretrain split",
                       FIELD(c.dataset.pretrain_per_tool)));
    e.push_back(number("dataset", "probe_train_per_tool", "grasps per seen tool in probe-train",
                       FIELD(c.dataset.probe_train_per_tool)));
    e.push_back(number("dataset", "probe_test_per_tool", "grasps per seen tool in probe-test",
                       FIELD(c.dataset.probe_test_per_tool)));
    e.push_back(number("dataset", "unseen_train_per_tool", "grasps per held-out tool in unseen-tools-train",
                       FIELD(c.dataset.unseen_train_per_tool)));
    e.push_back(number("dataset", "unseen_test_per_tool", "grasps per held-out tool in unseen-tools-test",
                       FIELD(c.dataset.unseen_test_per_tool)));
    e.push_back(number("dataset", "y_min", "grasp y offset range, mm", FIELD(c.dataset.ranges.y.min)));
    e.push_back(number("dataset", "y_max", "", FIELD(c.dataset.ranges.y.max)));
    e.push_back(number("dataset", "z_min", "grasp z offset range, mm", FIELD(c.dataset.ranges.z.min)));
    e.push_back(number("dataset", "z_max", "", FIELD(c.dataset.ranges.z.max)));
    e.push_back(number("dataset", "theta_min", "grasp rotation range, degrees", FIELD(c.dataset.ranges.theta.min)));
    e.push_back(number("dataset", "theta_max", "", FIELD(c.dataset.ranges.theta.max)));
    e.push_back(number("dataset", "depth_min", "indentation depth range, mm", FIELD(c.dataset.ranges.depth.min)));
    e.push_back(number("dataset", "depth_max", "", FIELD(c.dataset.ranges.depth.max)));
    e.push_back(number("dataset", "falloff", "contact falloff distance outside the tool outline, mm",
                       FIELD(c.dataset.contact.falloff)));
    e.push_back(number("dataset", "membrane_blur", "membrane Gaussian blur sigma, px",
                       FIELD(c.dataset.membrane.blur_sigma)));
    e.push_back(number("dataset", "membrane_noise", "membrane additive noise std, mm",
                       FIELD(c.dataset.membrane.noise_std)));
    e.push_back(number("dataset", "gel_blur", "gel Gaussian blur sigma, px", FIELD(c.dataset.gel.blur_sigma)));
    e.push_back(number("dataset", "gel_gain", "gel shading gain", FIELD(c.dataset.gel.gain)));
    e.push_back(number("dataset", "gel_light_elevation", "gel light elevation, radians",
                       FIELD(c.dataset.gel.light_elevation)));
    e.push_back(number("dataset", "gel_noise", "gel additive noise std", FIELD(c.dataset.gel.noise_std)));
    // model
    e.push_back(number("model", "backbone_dim", "backbone feature width", FIELD(c.pretrain.arch.backbone_dim)));
    e.push_back(number("model", "projection_hidden", "projection head hidden width",
                       FIELD(c.pretrain.arch.projection_hidden)));
    e.push_back(number("model", "latent_dim", "contrastive embedding width", FIELD(c.pretrain.arch.latent_dim)));
    e.push_back(boolean("model", "tie_towers",
                        "cttp: share weights above each sensor's first convolution, projection included",
                        FIELD(c.pretrain.tie_towers)));
    // pretrain
    e.push_back({{"pretrain", "mode", "cttp, recon, sup-class, sup-pose or random"},
                 [](const ExperimentConfig& c) { return pretrain::to_string(c.pretrain.mode); },
                 [](ExperimentConfig& c, const std::string& v) { c.pretrain.mode = pretrain::parse_mode(v); }});
    e.push_back(number("pretrain", "batch_size", "records per step (in-batch negatives for cttp)",
                       FIELD(c.pretrain.batch_size)));
    e.push_back(number("pretrain", "epochs", "passes over the pretrain split", FIELD(c.pretrain.epochs)));
    e.push_back(number("pretrain", "lr", "Adam learning rate", FIELD(c.pretrain.lr)));
    e.push_back(number("pretrain", "tau", "contrastive temperature", FIELD(c.pretrain.contrastive.tau)));
    e.push_back(boolean("pretrain", "symmetric", "average the loss over both retrieval directions",
                        FIELD(c.pretrain.contrastive.symmetric)));
    e.push_back(number("pretrain", "seed", "seed for initialisation and batch shuffling", FIELD(c.pretrain.seed)));
    // probes
    e.push_back(number("probes", "class_epochs", "linear classifier epochs", FIELD(c.eval.probes.class_epochs)));
    e.push_back(number("probes", "pose_epochs", "pose regressor epochs", FIELD(c.eval.probes.pose_epochs)));
    e.push_back(number("probes", "lr", "probe Adam learning rate", FIELD(c.eval.probes.lr)));
    e.push_back(number("probes", "batch_size", "probe minibatch size, 0 = full batch",
                       FIELD(c.eval.probes.batch_size)));
    e.push_back(number("probes", "seed", "probe initialisation and shuffling seed", FIELD(c.eval.probes.seed)));
    e.push_back(boolean("probes", "standardize",
                        "standardize features per sensor with statistics of the unlabeled pretrain split",
                        FIELD(c.eval.standardize)));
    e.push_back({{"probes", "features", "backbone or projected"},
                 [](const ExperimentConfig& c) {
                     return std::string(c.eval.probes.features == eval::FeatureKind::backbone ? "backbone"
                                                                                              : "projected");
                 },
                 [](ExperimentConfig& c, const std::string& v) {
                     if (v == "backbone") c.eval.probes.features = eval::FeatureKind::backbone;
                     else if (v == "projected") c.eval.probes.features = eval::FeatureKind::projected;
                     else throw ConfigError("probes.features: expected backbone or projected, got '" + v + "'");
                 }});
    // eval
    e.push_back({{"eval", "train_sensor", "sensor the probes are trained on; the other one is the across regime"},
                 [](const ExperimentConfig& c) { return to_string(c.eval.train_sensor); },
                 [](ExperimentConfig& c, const std::string& v) { c.eval.train_sensor = parse_sensor(v); }});
    e.push_back(number("eval", "translation_tol", "insertion tolerance on |dy| and |dz|, mm",
                       FIELD(c.eval.tolerances.translation_mm)));
    e.push_back(number("eval", "rotation_tol", "insertion tolerance on |dtheta|, degrees",
                       FIELD(c.eval.tolerances.rotation_deg)));
    e.push_back(boolean("eval", "insertion_logs", "include per-trial insertion logs in reports",
                        FIELD(c.eval.insertion_logs)));
    e.push_back(number("eval", "perplexity", "t-SNE perplexity", FIELD(c.tsne.perplexity)));
    e.push_back(number("eval", "tsne_iterations", "t-SNE gradient steps", FIELD(c.tsne.iterations)));
    e.push_back(number("eval", "tsne_seed", "t-SNE initialisation jitter seed", FIELD(c.tsne.seed)));
    // sweep
    e.push_back({{"sweep", "sizes", "comma separated cttp batch sizes"},
                 [](const ExperimentConfig& c) {
                     std::string s;
                     for (auto v : c.sweep_sizes) s += (s.empty() ? "" : ",") + std::to_string(v);
                     return s;
                 },
                 [](ExperimentConfig& c, const std::string& v) { c.sweep_sizes = eval::parse_sizes(v); }});
    return e;
}

#undef FIELD

const std::vector<Entry>& entries() {
    static const std::vector<Entry> e = build_entries();
    return e;
}

const Entry& find(const std::string& section, const std::string& key) {
    for (const auto& e : entries()) {
        if (e.id.section == section && e.id.key == key) return e;
    }
    throw ConfigError("unknown config key '" + section + "." + key + "'");
}

} // namespace

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> k;
        for (const auto& e : entries()) k.push_back(e.id);
        return k;
    }();
    return keys;
}

void set_value(ExperimentConfig& config, const std::string& section, const std::string& key,
               const std::string& value) {
    find(section, key).set(config, value);
}

std::string get_value(const ExperimentConfig& config, const std::string& section, const std::string& key) {
    return find(section, key).get(config);
}

void apply_config_text(ExperimentConfig& config, const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigBase().from_config(in);
    } catch (const CLI::Error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    for (const auto& item : items) {
        if (item.name == "++" || item.name == "--") continue; // section markers
        if (item.parents.size() != 1) {
            throw ConfigError(origin + ": key '" + item.fullname() + "' must sit in exactly one [section]");
        }
        std::string value;
        for (const auto& part : item.inputs) value += (value.empty() ? "" : ",") + part;
        try {
            set_value(config, item.parents[0], item.name, value);
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ": " + e.what());
        }
    }
}

void apply_config_file(ExperimentConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    apply_config_text(config, ss.str(), path);
}

std::string env_name(const std::string& section, const std::string& key) {
    std::string out = "CTTP_" + section + "_" + key;
    for (auto& c : out) c = c == '-' ? '_' : char(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

void apply_env(ExperimentConfig& config, const EnvLookup& getenv) {
    for (const auto& e : entries()) {
        const auto name = env_name(e.id.section, e.id.key);
        if (auto v = getenv(name)) {
            try {
                e.set(config, *v);
            } catch (const ConfigError& err) {
                throw ConfigError(name + ": " + err.what());
            }
        }
    }
}

void apply_env(ExperimentConfig& config) {
    apply_env(config, [](const std::string& name) -> std::optional<std::string> {
        const char* v = std::getenv(name.c_str());
        if (!v) return std::nullopt;
        return std::string(v);
    });
}

void validate(const ExperimentConfig& c) {
    auto range = [](const sim::Range& r, const char* name) {
        if (!(r.min <= r.max)) throw ConfigError(std::string("dataset.") + name + "_min exceeds " + name + "_max");
    };
    range(c.dataset.ranges.y, "y");
    range(c.dataset.ranges.z, "z");
    range(c.dataset.ranges.theta, "theta");
    range(c.dataset.ranges.depth, "depth");
    if (!(c.dataset.ranges.depth.min > 0.0)) throw ConfigError("dataset.depth_min must be positive");
    if (c.dataset.pretrain_per_tool == 0 || c.dataset.probe_train_per_tool == 0 || c.dataset.probe_test_per_tool == 0 ||
        c.dataset.unseen_train_per_tool == 0 || c.dataset.unseen_test_per_tool == 0) {
        throw ConfigError("every dataset.*_per_tool count must be positive");
    }
    if (c.pretrain.arch.backbone_dim == 0 || c.pretrain.arch.projection_hidden == 0 || c.pretrain.arch.latent_dim == 0) {
        throw ConfigError("model widths must be positive");
    }
    pretrain::validate(c.pretrain);
    if (!(c.eval.probes.lr > 0.0)) throw ConfigError("probes.lr must be positive");
    if (c.eval.probes.class_epochs == 0 || c.eval.probes.pose_epochs == 0) {
        throw ConfigError("probe epoch counts must be positive");
    }
    if (c.eval.tolerances.translation_mm < 0.0 || c.eval.tolerances.rotation_deg < 0.0) {
        throw ConfigError("insertion tolerances must be non-negative");
    }
    if (!(c.tsne.perplexity > 0.0)) throw ConfigError("eval.perplexity must be positive");
    if (c.sweep_sizes.empty()) throw ConfigError("sweep.sizes is empty");
}

std::string to_config_text(const ExperimentConfig& config) {
    std::string out = "# Resolved configuration. Every key is listed; values shown are the ones used.\n";
    std::string section;
    for (const auto& e : entries()) {
        if (e.id.section != section) {
            section = e.id.section;
            out += "\n[" + section + "]\n";
        }
        if (!e.id.doc.empty()) out += "# " + e.id.doc + "\n";
        out += e.id.key + " = " + e.get(config) + "\n";
    }
    return out;
}

} // namespace cttp::cli
