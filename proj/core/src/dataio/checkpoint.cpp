#include "cttp/dataio/checkpoint.hpp"

#include <bit>
#include <set>
#include <string_view>

#include "cttp/dataio/bytes.hpp"

namespace cttp::io {

namespace {
constexpr std::string_view magic() { return {kCheckpointMagic, 8}; }

std::uint64_t byte_sum(float v) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    return (bits & 0xffu) + ((bits >> 8) & 0xffu) + ((bits >> 16) & 0xffu) + (bits >> 24);
}
} // namespace

std::uint64_t payload_checksum(const ad::ParamList<float>& tensors) {
    std::uint64_t sum = 0;
    for (const auto& t : tensors) {
        for (float v : t.tensor.data()) sum += byte_sum(v);
    }
    return sum;
}

std::vector<std::uint8_t> encode_checkpoint(const ad::ParamList<float>& tensors) {
    std::set<std::string> names;
    for (const auto& t : tensors) {
        if (!names.insert(t.name).second) throw DuplicateNameError("checkpoint: duplicate tensor name '" + t.name + "'");
        if (t.name.size() > 0xffff) throw DataError("checkpoint: tensor name too long");
        if (t.tensor.rank() > 0xff) throw DataError("checkpoint: tensor rank too large");
    }
    ByteWriter w;
    w.bytes(magic());
    w.u32(static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
        w.u16(static_cast<std::uint16_t>(t.name.size()));
        w.bytes(t.name);
        w.u8(static_cast<std::uint8_t>(t.tensor.rank()));
        for (auto d : t.tensor.shape()) w.u32(static_cast<std::uint32_t>(d));
        for (float v : t.tensor.data()) w.f32(v);
    }
    w.u64(payload_checksum(tensors));
    return w.take();
}

ad::ParamList<float> decode_checkpoint(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    if (r.remaining() < 8) throw TruncatedFileError("truncated checkpoint: missing magic");
    if (r.bytes(8) != magic()) throw BadMagicError("bad magic: not a CTTPCK01 checkpoint");
    const auto count = r.u32();
    ad::ParamList<float> out;
    std::set<std::string> names;
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto name_len = r.u16();
        auto name = r.bytes(name_len);
        if (!names.insert(name).second) throw DuplicateNameError("checkpoint: duplicate tensor name '" + name + "'");
        const auto ndim = r.u8();
        if (ndim == 0) throw DataError("checkpoint: tensor '" + name + "' has rank 0");
        ad::Shape shape(ndim);
        for (auto& d : shape) {
            d = r.u32();
            if (d == 0) throw DataError("checkpoint: tensor '" + name + "' has a zero dimension");
        }
        std::vector<float> values(ad::shape_numel(shape));
        for (auto& v : values) v = r.f32();
        out.push_back({std::move(name), ad::Tensor<float>(std::move(shape), std::move(values))});
    }
    const auto stored = r.u64();
    if (r.remaining() != 0) {
        throw CountMismatchError("checkpoint has " + std::to_string(r.remaining()) + " trailing bytes");
    }
    const auto actual = payload_checksum(out);
    if (stored != actual) {
        throw ChecksumError("checkpoint checksum mismatch: stored " + std::to_string(stored) + ", computed " +
                            std::to_string(actual));
    }
    return out;
}

void save_checkpoint(const ad::ParamList<float>& tensors, const std::filesystem::path& path) {
    write_file(path, encode_checkpoint(tensors));
}

ad::ParamList<float> load_checkpoint(const std::filesystem::path& path) {
    return decode_checkpoint(read_file(path));
}

} // namespace cttp::io
