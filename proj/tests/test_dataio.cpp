#include <bit>
#include <filesystem>
#include <fstream>
#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cttp/autodiff/rng.hpp"
#include "cttp/dataio/bytes.hpp"
#include "cttp/dataio/checkpoint.hpp"
#include "cttp/dataio/manifest.hpp"
#include "cttp/dataio/report.hpp"
#include "cttp/dataio/split_file.hpp"

using namespace cttp;
namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

float random_bits(Rng& rng) { return std::bit_cast<float>(static_cast<std::uint32_t>(rng.next())); }

std::vector<sim::PairedRecord> random_records(Rng& rng, std::size_t n, std::size_t h, std::size_t w) {
    std::vector<sim::PairedRecord> out(n);
    for (auto& r : out) {
        r.grasp = {std::uint32_t(rng.next()), std::uint32_t(rng.next()), random_bits(rng), random_bits(rng),
                   random_bits(rng), random_bits(rng)};
        r.gel = {SensorKind::gel, 3, h, w, std::vector<float>(3 * h * w)};
        r.membrane = {SensorKind::membrane, 1, h, w, std::vector<float>(h * w)};
        for (auto& v : r.gel.data) v = random_bits(rng);
        for (auto& v : r.membrane.data) v = random_bits(rng);
    }
    return out;
}

ad::ParamList<float> random_tensors(Rng& rng) {
    ad::ParamList<float> out;
    const auto count = rng.next() % 5;
    for (std::size_t i = 0; i < count; ++i) {
        ad::Shape shape(1 + rng.next() % 3);
        for (auto& d : shape) d = 1 + rng.next() % 4;
        ad::Tensor<float> t(shape);
        for (auto& v : t.data()) v = random_bits(rng);
        out.push_back({"t" + std::to_string(i) + "." + std::to_string(rng.next() % 1000), t});
    }
    return out;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("cttp-dataio-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                            "-" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST(Bytes, LittleEndianRegardlessOfHost) {
    io::ByteWriter w;
    w.u32(0x01020304u);
    w.u16(0xA0B0u);
    const auto& b = w.buffer();
    ASSERT_EQ(b.size(), 6u);
    EXPECT_EQ(b[0], 0x04);
    EXPECT_EQ(b[3], 0x01);
    EXPECT_EQ(b[4], 0xB0);
    io::ByteReader r(b);
    EXPECT_EQ(r.u32(), 0x01020304u);
    EXPECT_EQ(r.u16(), 0xA0B0u);
    EXPECT_THROW(r.u8(), io::TruncatedFileError);
}

TEST(SplitFile, RoundTripIsBitExactOverRandomTrials) {
    Rng rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = rng.next() % 4, h = 1 + rng.next() % 4, w = 1 + rng.next() % 4;
        const auto records = random_records(rng, n, h, w);
        const auto bytes = io::encode_split(records, h, w);
        ASSERT_EQ(bytes.size(), io::split_file_size(n, h, w));
        const auto decoded = io::decode_split(bytes);
        ASSERT_EQ(decoded.size(), n);
        ASSERT_EQ(io::encode_split(decoded, h, w), bytes) << "trial " << trial;
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_EQ(decoded[i].grasp.grasp_id, records[i].grasp.grasp_id);
            EXPECT_EQ(std::bit_cast<std::uint32_t>(decoded[i].grasp.theta),
                      std::bit_cast<std::uint32_t>(records[i].grasp.theta));
        }
    }
}

TEST(Checkpoint, RoundTripIsBitExactOverRandomTrials) {
    Rng rng(77);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto tensors = random_tensors(rng);
        const auto bytes = io::encode_checkpoint(tensors);
        const auto decoded = io::decode_checkpoint(bytes);
        ASSERT_EQ(decoded.size(), tensors.size());
        for (std::size_t i = 0; i < tensors.size(); ++i) {
            EXPECT_EQ(decoded[i].name, tensors[i].name);
            EXPECT_EQ(decoded[i].tensor.shape(), tensors[i].tensor.shape());
        }
        ASSERT_EQ(io::encode_checkpoint(decoded), bytes) << "trial " << trial;
    }
}

TEST(SplitFile, CorruptionIsReported) {
    Rng rng(1);
    const auto bytes = io::encode_split(random_records(rng, 2, 2, 2), 2, 2);
    auto bad = bytes;
    bad[0] = 'X';
    EXPECT_THROW(io::decode_split(bad), io::BadMagicError);
    EXPECT_THROW(io::decode_split(std::span(bytes).first(bytes.size() - 1)), io::TruncatedFileError);
    EXPECT_THROW(io::decode_split(std::span(bytes).first(10)), io::TruncatedFileError);
    auto longer = bytes;
    longer.push_back(0);
    EXPECT_THROW(io::decode_split(longer), io::CountMismatchError);
}

TEST(SplitFile, HeterogeneousFramesAreRejected) {
    Rng rng(1);
    auto a = random_records(rng, 1, 2, 2), b = random_records(rng, 1, 3, 3);
    a.push_back(b[0]);
    EXPECT_THROW(io::encode_split(a), DataError);
}

TEST(Checkpoint, CorruptionIsReported) {
    ad::ParamList<float> t{{"a", ad::Tensor<float>({2}, std::vector<float>{1.f, 2.f})}};
    const auto bytes = io::encode_checkpoint(t);
    auto flipped = bytes;
    flipped[flipped.size() - 9] ^= 0x01; // last payload byte
    EXPECT_THROW(io::decode_checkpoint(flipped), io::ChecksumError);
    EXPECT_THROW(io::decode_checkpoint(std::span(bytes).first(bytes.size() - 3)), io::TruncatedFileError);
    auto magic = bytes;
    magic[7] = '2';
    EXPECT_THROW(io::decode_checkpoint(magic), io::BadMagicError);
    ad::ParamList<float> dup{t[0], t[0]};
    EXPECT_THROW(io::encode_checkpoint(dup), io::DuplicateNameError);
}

TEST(Golden, SplitFileMatchesIndependentWriter) {
    const fs::path dir = CTTP_GOLDEN_DIR;
    const auto expected = nlohmann::json::parse(std::ifstream(dir / "expected.json"))["split"];
    const auto bytes = slurp(dir / "split_small.bin");
    const auto records = io::decode_split(bytes);
    ASSERT_EQ(records.size(), expected["records"].size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& e = expected["records"][i];
        const auto& r = records[i];
        EXPECT_EQ(r.grasp.tool_id, e["tool_id"].get<std::uint32_t>());
        EXPECT_EQ(r.grasp.grasp_id, e["grasp_id"].get<std::uint32_t>());
        EXPECT_EQ(r.grasp.y, e["y"].get<float>());
        EXPECT_EQ(r.grasp.theta, e["theta"].get<float>());
        EXPECT_EQ(r.gel.height, 2u);
        EXPECT_EQ(r.gel.width, 3u);
        for (std::size_t k = 0; k < r.gel.data.size(); ++k) EXPECT_EQ(r.gel.data[k], e["gel"][k].get<float>());
        for (std::size_t k = 0; k < r.membrane.data.size(); ++k)
            EXPECT_EQ(r.membrane.data[k], e["membrane"][k].get<float>());
    }
    EXPECT_EQ(io::encode_split(records), bytes);
}

TEST(Golden, CheckpointMatchesIndependentWriter) {
    const fs::path dir = CTTP_GOLDEN_DIR;
    const auto expected = nlohmann::json::parse(std::ifstream(dir / "expected.json"))["checkpoint"];
    const auto bytes = slurp(dir / "checkpoint_small.ckpt");
    const auto tensors = io::decode_checkpoint(bytes);
    ASSERT_EQ(tensors.size(), expected["tensors"].size());
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        const auto& e = expected["tensors"][i];
        EXPECT_EQ(tensors[i].name, e["name"].get<std::string>());
        EXPECT_EQ(tensors[i].tensor.shape(), e["shape"].get<ad::Shape>());
        for (std::size_t k = 0; k < tensors[i].tensor.numel(); ++k)
            EXPECT_EQ(tensors[i].tensor[k], e["values"][k].get<float>());
    }
    EXPECT_EQ(io::payload_checksum(tensors), expected["checksum"].get<std::uint64_t>());
    EXPECT_EQ(io::encode_checkpoint(tensors), bytes);
    // Layout spot checks: magic, count, first name length at offset 12.
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 8), "CTTPCK01");
    EXPECT_EQ(bytes[8], 2);
    EXPECT_EQ(bytes[12], expected["tensors"][0]["name"].get<std::string>().size());
}

TEST(Manifest, DatasetDirectoryRoundTrip) {
    TempDir tmp;
    sim::DatasetConfig cfg;
    cfg.pretrain_per_tool = 2;
    cfg.probe_train_per_tool = cfg.probe_test_per_tool = 1;
    cfg.unseen_train_per_tool = cfg.unseen_test_per_tool = 1;
    const auto ds = sim::generate_dataset(cfg);
    io::write_dataset(tmp.path, ds);
    EXPECT_NO_THROW(io::validate_dataset_dir(tmp.path));
    const auto back = io::load_dataset(tmp.path);
    EXPECT_EQ(back.splits, ds.splits);
    EXPECT_EQ(io::dataset_config_to_json(back.config), io::dataset_config_to_json(ds.config));

    const auto manifest = nlohmann::json::parse(std::ifstream(tmp.path / "manifest.json"));
    EXPECT_EQ(manifest["tools"].size(), 12u);
    EXPECT_EQ(manifest["splits"].size(), 5u);

    // Deleting a split file or truncating one is caught at validation.
    fs::resize_file(tmp.path / io::split_file_name("probe-test"), 10);
    EXPECT_THROW(io::validate_dataset_dir(tmp.path), io::TruncatedFileError);
    fs::remove(tmp.path / io::split_file_name("probe-test"));
    EXPECT_THROW(io::validate_dataset_dir(tmp.path), DataError);
}

TEST(Report, SchemaAndPopulationStd) {
    const std::vector<double> v{1.0, 3.0};
    const auto s = io::mean_std(v);
    EXPECT_DOUBLE_EQ(s.mean, 2.0);
    EXPECT_DOUBLE_EQ(s.std, 1.0); // population, not sample

    io::EvalReport r;
    EXPECT_THROW(io::emit_report(r), DataError);
    r.classification.push_back({"cttp", "unseen-grasps", "membrane", "gel", 9, 5, 10, 0.5});
    r.pose.push_back({"cttp", "unseen-tools", "membrane", "membrane", {0.25, 4.39}, {0, 1}, {0, 2}, 0.5, 0.6, 3, 5, 10});
    const auto j = io::emit_report(r);
    EXPECT_EQ(j["classification"][0]["regime"], "across-sensor");
    EXPECT_NEAR(j["classification"][0]["chance"].get<double>(), 1.0 / 9.0, 1e-15);
    EXPECT_EQ(j["pose"][0]["regime"], "within-sensor");
    EXPECT_EQ(j["pose"][0]["y_error_mm"]["display"], "0.25 ± 4.39");
}
