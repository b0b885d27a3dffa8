#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cttp/autodiff/tensor.hpp"

namespace cttp::io {

// "CTTPCK01", u32 tensor_count, per tensor: u16 name length, UTF-8 name,
// u8 ndim, u32 dims[ndim], f32 payload; trailing u64 = sum of all payload
// bytes mod 2^64.
inline constexpr char kCheckpointMagic[] = "CTTPCK01";

std::vector<std::uint8_t> encode_checkpoint(const ad::ParamList<float>& tensors);
ad::ParamList<float> decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const ad::ParamList<float>& tensors, const std::filesystem::path& path);
ad::ParamList<float> load_checkpoint(const std::filesystem::path& path);

/// Checksum over the f32 payload bytes only, as stored in the trailer.
std::uint64_t payload_checksum(const ad::ParamList<float>& tensors);

} // namespace cttp::io
