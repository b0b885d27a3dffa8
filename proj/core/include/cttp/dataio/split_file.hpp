#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "cttp/sensorsim/records.hpp"

namespace cttp::io {

// "CTTPDS01", u32 count, u32 H, u32 W, then per record:
// u32 tool_id, u32 grasp_id, f32 y, z, theta, depth, gel[3*H*W], membrane[H*W].
inline constexpr char kSplitMagic[] = "CTTPDS01";
inline constexpr std::size_t kSplitHeaderBytes = 20;

std::size_t split_file_size(std::size_t records, std::size_t height, std::size_t width);

/// Empty record lists need explicit frame dimensions.
std::vector<std::uint8_t> encode_split(std::span<const sim::PairedRecord> records, std::size_t height = 32,
                                       std::size_t width = 32);
std::vector<sim::PairedRecord> decode_split(std::span<const std::uint8_t> bytes);

void write_split(const std::filesystem::path& path, std::span<const sim::PairedRecord> records,
                 std::size_t height = 32, std::size_t width = 32);
std::vector<sim::PairedRecord> read_split(const std::filesystem::path& path,
                                          std::optional<std::size_t> expected_count = std::nullopt);

struct SplitHeader {
    std::uint32_t count = 0;
    std::uint32_t height = 0;
    std::uint32_t width = 0;
};
SplitHeader read_split_header(const std::filesystem::path& path);

} // namespace cttp::io
