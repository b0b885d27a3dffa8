#include "cttp/dataio/manifest.hpp"

#include <algorithm>
#include <fstream>

#include "cttp/dataio/errors.hpp"
#include "cttp/dataio/split_file.hpp"
#include "cttp/sensorsim/tools.hpp"

namespace cttp::io {

namespace {
nlohmann::json range_json(const sim::Range& r) { return {r.min, r.max}; }
sim::Range range_from(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest '" + path.string() + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed manifest '" + path.string() + "': " + e.what());
    }
}
} // namespace

std::string split_file_name(const std::string& split) { return split + ".bin"; }

nlohmann::json dataset_config_to_json(const sim::DatasetConfig& c) {
    return {
        {"seed", c.seed},
        {"per_tool",
         {{"pretrain", c.pretrain_per_tool},
          {"probe-train", c.probe_train_per_tool},
          {"probe-test", c.probe_test_per_tool},
          {"unseen-tools-train", c.unseen_train_per_tool},
          {"unseen-tools-test", c.unseen_test_per_tool}}},
        {"ranges",
         {{"y_mm", range_json(c.ranges.y)},
          {"z_mm", range_json(c.ranges.z)},
          {"theta_deg", range_json(c.ranges.theta)},
          {"depth_mm", range_json(c.ranges.depth)}}},
        {"image", {{"height", c.contact.height}, {"width", c.contact.width}, {"pixel_pitch_mm", c.contact.pixel_pitch}}},
        {"contact", {{"falloff_mm", c.contact.falloff}}},
        {"membrane", {{"blur_sigma_px", c.membrane.blur_sigma}, {"noise_std", c.membrane.noise_std}}},
        {"gel",
         {{"blur_sigma_px", c.gel.blur_sigma},
          {"base", c.gel.base},
          {"gain", c.gel.gain},
          {"light_elevation", c.gel.light_elevation},
          {"light_azimuth_deg", c.gel.light_azimuth_deg},
          {"noise_std", c.gel.noise_std}}},
    };
}

sim::DatasetConfig dataset_config_from_json(const nlohmann::json& j) {
    sim::DatasetConfig c;
    try {
        c.seed = j.at("seed").get<std::uint64_t>();
        const auto& pt = j.at("per_tool");
        c.pretrain_per_tool = pt.at("pretrain");
        c.probe_train_per_tool = pt.at("probe-train");
        c.probe_test_per_tool = pt.at("probe-test");
        c.unseen_train_per_tool = pt.at("unseen-tools-train");
        c.unseen_test_per_tool = pt.at("unseen-tools-test");
        const auto& r = j.at("ranges");
        c.ranges.y = range_from(r.at("y_mm"));
        c.ranges.z = range_from(r.at("z_mm"));
        c.ranges.theta = range_from(r.at("theta_deg"));
        c.ranges.depth = range_from(r.at("depth_mm"));
        c.contact.height = j.at("image").at("height");
        c.contact.width = j.at("image").at("width");
        c.contact.pixel_pitch = j.at("image").at("pixel_pitch_mm");
        c.contact.falloff = j.at("contact").at("falloff_mm");
        c.membrane.blur_sigma = j.at("membrane").at("blur_sigma_px");
        c.membrane.noise_std = j.at("membrane").at("noise_std");
        const auto& g = j.at("gel");
        c.gel.blur_sigma = g.at("blur_sigma_px");
        c.gel.base = g.at("base");
        c.gel.gain = g.at("gain");
        c.gel.light_elevation = g.at("light_elevation");
        c.gel.light_azimuth_deg = g.at("light_azimuth_deg").get<std::array<double, 3>>();
        c.gel.noise_std = g.at("noise_std");
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("manifest: malformed generator config: ") + e.what());
    }
    return c;
}

nlohmann::json make_manifest(const sim::Dataset& dataset) {
    nlohmann::json tools = nlohmann::json::array();
    const auto unseen = sim::unseen_tool_ids();
    for (const auto& t : sim::tool_library()) {
        const bool held_out = std::find(unseen.begin(), unseen.end(), t.id) != unseen.end();
        tools.push_back({{"id", t.id}, {"name", t.name}, {"held_out", held_out}, {"sdf", t.sdf.to_json()}});
    }
    nlohmann::json splits = nlohmann::json::array();
    for (const char* name : sim::kSplitNames) {
        const auto it = dataset.splits.find(name);
        const std::size_t count = it == dataset.splits.end() ? 0 : it->second.size();
        splits.push_back({{"name", name}, {"file", split_file_name(name)}, {"count", count}});
    }
    const auto& c = dataset.config;
    nlohmann::json lights = nlohmann::json::array();
    for (double az : c.gel.light_azimuth_deg) lights.push_back({{"azimuth_deg", az}, {"elevation", c.gel.light_elevation}});
    return {
        {"format", "cttp-dataset"},
        {"version", kManifestVersion},
        {"seed", c.seed},
        {"image_size", {{"height", c.contact.height}, {"width", c.contact.width}, {"pixel_pitch_mm", c.contact.pixel_pitch}}},
        {"tools", tools},
        {"splits", splits},
        {"sensors",
         {{"membrane", {{"channels", 1}, {"blur_sigma_px", c.membrane.blur_sigma}, {"noise_std", c.membrane.noise_std}}},
          {"gel",
           {{"channels", 3},
            {"blur_sigma_px", c.gel.blur_sigma},
            {"lights", lights},
            {"noise_std", c.gel.noise_std}}}}},
        {"generator", dataset_config_to_json(c)},
    };
}

void write_dataset(const std::filesystem::path& dir, const sim::Dataset& dataset) {
    std::filesystem::create_directories(dir);
    for (const char* name : sim::kSplitNames) {
        const auto& records = dataset.split(name);
        write_split(dir / split_file_name(name), records, dataset.config.contact.height, dataset.config.contact.width);
    }
    std::ofstream out(dir / "manifest.json");
    if (!out) throw DataError("cannot write manifest in '" + dir.string() + "'");
    out << make_manifest(dataset).dump(2) << '\n';
}

namespace {
nlohmann::json checked_manifest(const std::filesystem::path& dir) {
    const auto manifest = read_json(dir / "manifest.json");
    if (manifest.value("format", "") != "cttp-dataset" || manifest.value("version", 0) != kManifestVersion) {
        throw DataError("manifest in '" + dir.string() + "' has an unsupported format or version");
    }
    for (const auto& s : manifest.at("splits")) {
        const auto path = dir / s.at("file").get<std::string>();
        if (!std::filesystem::exists(path)) throw DataError("split file '" + path.string() + "' is missing");
        const auto header = read_split_header(path);
        if (header.count != s.at("count").get<std::size_t>()) {
            throw CountMismatchError("split '" + path.string() + "' header holds " + std::to_string(header.count) +
                                     " records, manifest says " + std::to_string(s.at("count").get<std::size_t>()));
        }
    }
    return manifest;
}
} // namespace

void validate_dataset_dir(const std::filesystem::path& dir) { checked_manifest(dir); }

sim::Dataset load_dataset(const std::filesystem::path& dir) {
    const auto manifest = checked_manifest(dir);
    sim::Dataset ds;
    ds.config = dataset_config_from_json(manifest.at("generator"));
    for (const auto& s : manifest.at("splits")) {
        const auto name = s.at("name").get<std::string>();
        ds.splits[name] = read_split(dir / s.at("file").get<std::string>(), s.at("count").get<std::size_t>());
    }
    return ds;
}

} // namespace cttp::io
