#include "parkocc/dataset/pointio.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "parkocc/error.hpp"

namespace parkocc::dataset {

namespace fs = std::filesystem;

namespace {

void put_f32(char* dst, float v) {
  auto u = std::bit_cast<std::uint32_t>(v);
  for (int b = 0; b < 4; ++b) dst[b] = static_cast<char>((u >> (8 * b)) & 0xFF);
}

float get_f32(const char* src) {
  std::uint32_t u = 0;
  for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(static_cast<unsigned char>(src[b])) << (8 * b);
  return std::bit_cast<float>(u);
}

}  // namespace

std::vector<char> read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<char> bytes(size);
  if (size > 0 && !in.read(bytes.data(), static_cast<std::streamsize>(size))) {
    throw IoError("short read on " + path.string());
  }
  return bytes;
}

void write_file_bytes(const fs::path& path, std::span<const char> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed on " + path.string());
}

void write_point_bin(std::span<const PointRecord> points, const fs::path& path) {
  std::vector<char> buf(points.size() * kPointRecordBytes);
  char* p = buf.data();
  for (const auto& r : points) {
    put_f32(p, r.x);
    put_f32(p + 4, r.y);
    put_f32(p + 8, r.z);
    put_f32(p + 12, r.intensity);
    put_f32(p + 16, r.ring);
    p += kPointRecordBytes;
  }
  write_file_bytes(path, buf);
}

std::vector<PointRecord> read_point_bin(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  if (bytes.size() % kPointRecordBytes != 0) {
    throw IoError("truncated point file " + path.string() + ": " + std::to_string(bytes.size()) +
                  " bytes is not a multiple of 20");
  }
  std::vector<PointRecord> out(bytes.size() / kPointRecordBytes);
  const char* p = bytes.data();
  for (auto& r : out) {
    r.x = get_f32(p);
    r.y = get_f32(p + 4);
    r.z = get_f32(p + 8);
    r.intensity = get_f32(p + 12);
    r.ring = get_f32(p + 16);
    p += kPointRecordBytes;
  }
  return out;
}

void write_lidarseg(std::span<const std::uint8_t> labels, const fs::path& path) {
  write_file_bytes(path, {reinterpret_cast<const char*>(labels.data()), labels.size()});
}

std::vector<std::uint8_t> read_lidarseg(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  std::vector<std::uint8_t> out(bytes.size());
  if (!bytes.empty()) std::memcpy(out.data(), bytes.data(), bytes.size());
  return out;
}

}  // namespace parkocc::dataset
