#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace parkocc::dataset {

/// One LiDAR return as stored on disk: five little-endian float32 values.
struct PointRecord {
  float x = 0, y = 0, z = 0;
  float intensity = 0;  // 255 * incidence cosine
  float ring = 0;       // channel index

  bool operator==(const PointRecord&) const = default;
};

inline constexpr std::size_t kPointRecordBytes = 20;

void write_point_bin(std::span<const PointRecord> points, const std::filesystem::path& path);
/// Throws IoError when the file is missing or its size is not a multiple of 20.
std::vector<PointRecord> read_point_bin(const std::filesystem::path& path);

void write_lidarseg(std::span<const std::uint8_t> labels, const std::filesystem::path& path);
std::vector<std::uint8_t> read_lidarseg(const std::filesystem::path& path);

/// Whole file as bytes. Throws IoError.
std::vector<char> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const char> bytes);

}  // namespace parkocc::dataset
