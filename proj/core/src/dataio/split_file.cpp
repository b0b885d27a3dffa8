#include "cttp/dataio/split_file.hpp"

#include <string_view>

#include "cttp/dataio/bytes.hpp"

namespace cttp::io {

namespace {
constexpr std::string_view magic() { return {kSplitMagic, 8}; }

void write_frame(ByteWriter& w, const sim::TactileFrame& f, SensorKind kind, std::size_t h, std::size_t wd) {
    const std::size_t expected = sensor_channels(kind) * h * wd;
    if (f.sensor != kind || f.data.size() != expected) {
        throw DataError("write_split: " + to_string(kind) + " frame has " + std::to_string(f.data.size()) +
                        " values, expected " + std::to_string(expected));
    }
    for (float v : f.data) w.f32(v);
}

sim::TactileFrame read_frame(ByteReader& r, SensorKind kind, std::size_t h, std::size_t wd) {
    sim::TactileFrame f{kind, sensor_channels(kind), h, wd, std::vector<float>(sensor_channels(kind) * h * wd)};
    for (auto& v : f.data) v = r.f32();
    return f;
}

SplitHeader parse_header(ByteReader& r) {
    if (r.remaining() < kSplitHeaderBytes) {
        throw TruncatedFileError("truncated split file: " + std::to_string(r.remaining()) + " bytes, header needs " +
                                 std::to_string(kSplitHeaderBytes));
    }
    if (r.bytes(8) != magic()) throw BadMagicError("bad magic: not a CTTPDS01 split file");
    SplitHeader h;
    h.count = r.u32();
    h.height = r.u32();
    h.width = r.u32();
    return h;
}
} // namespace

std::size_t split_file_size(std::size_t records, std::size_t height, std::size_t width) {
    return kSplitHeaderBytes + records * (24 + 16 * height * width);
}

std::vector<std::uint8_t> encode_split(std::span<const sim::PairedRecord> records, std::size_t height,
                                       std::size_t width) {
    if (!records.empty()) {
        height = records.front().membrane.height;
        width = records.front().membrane.width;
    }
    ByteWriter w;
    w.bytes(magic());
    w.u32(static_cast<std::uint32_t>(records.size()));
    w.u32(static_cast<std::uint32_t>(height));
    w.u32(static_cast<std::uint32_t>(width));
    for (const auto& rec : records) {
        if (rec.membrane.height != height || rec.membrane.width != width || rec.gel.height != height ||
            rec.gel.width != width) {
            throw DataError("write_split: records are not homogeneous in frame size");
        }
        w.u32(rec.grasp.tool_id);
        w.u32(rec.grasp.grasp_id);
        w.f32(rec.grasp.y);
        w.f32(rec.grasp.z);
        w.f32(rec.grasp.theta);
        w.f32(rec.grasp.depth);
        write_frame(w, rec.gel, SensorKind::gel, height, width);
        write_frame(w, rec.membrane, SensorKind::membrane, height, width);
    }
    return w.take();
}

std::vector<sim::PairedRecord> decode_split(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    const auto header = parse_header(r);
    const std::size_t expected = split_file_size(header.count, header.height, header.width);
    if (bytes.size() < expected) {
        throw TruncatedFileError("truncated split file: " + std::to_string(bytes.size()) + " bytes, header declares " +
                                 std::to_string(header.count) + " records (" + std::to_string(expected) + " bytes)");
    }
    if (bytes.size() > expected) {
        throw CountMismatchError("split file has " + std::to_string(bytes.size() - expected) +
                                 " trailing bytes beyond the declared " + std::to_string(header.count) + " records");
    }
    std::vector<sim::PairedRecord> out;
    out.reserve(header.count);
    for (std::uint32_t i = 0; i < header.count; ++i) {
        sim::PairedRecord rec;
        rec.grasp.tool_id = r.u32();
        rec.grasp.grasp_id = r.u32();
        rec.grasp.y = r.f32();
        rec.grasp.z = r.f32();
        rec.grasp.theta = r.f32();
        rec.grasp.depth = r.f32();
        rec.gel = read_frame(r, SensorKind::gel, header.height, header.width);
        rec.membrane = read_frame(r, SensorKind::membrane, header.height, header.width);
        out.push_back(std::move(rec));
    }
    return out;
}

void write_split(const std::filesystem::path& path, std::span<const sim::PairedRecord> records, std::size_t height,
                 std::size_t width) {
    const auto bytes = encode_split(records, height, width);
    write_file(path, bytes);
}

std::vector<sim::PairedRecord> read_split(const std::filesystem::path& path, std::optional<std::size_t> expected_count) {
    const auto bytes = read_file(path);
    auto records = decode_split(bytes);
    if (expected_count && records.size() != *expected_count) {
        throw CountMismatchError("split '" + path.string() + "' holds " + std::to_string(records.size()) +
                                 " records, manifest expects " + std::to_string(*expected_count));
    }
    return records;
}

SplitHeader read_split_header(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    ByteReader r(bytes);
    return parse_header(r);
}

} // namespace cttp::io
