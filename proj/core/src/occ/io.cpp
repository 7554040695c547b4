#include "parkocc/occ/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "parkocc/dataset/pointio.hpp"
#include "parkocc/densify/mesh.hpp"
#include "parkocc/error.hpp"

namespace parkocc::occ {

namespace {

template <typename T>
void put(std::vector<char>& out, T v) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  const U u = std::bit_cast<U>(v);
  for (std::size_t b = 0; b < sizeof(U); ++b) out.push_back(static_cast<char>((u >> (8 * b)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::span<const char> bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    if (pos_ + sizeof(U) > bytes_.size()) throw IoError(std::string("grid file truncated in ") + what);
    U u = 0;
    for (std::size_t b = 0; b < sizeof(U); ++b) {
      u |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + b])) << (8 * b);
    }
    pos_ += sizeof(U);
    return std::bit_cast<T>(u);
  }
  std::span<const char> take(std::size_t n, const char* what) {
    if (n > bytes_.size() - pos_) throw IoError(std::string("grid file truncated in ") + what);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::span<const char> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<char> encode_grid(const VoxelGrid& g) {
  g.spec.validate();
  if (g.occupied.size() != g.spec.count() || g.label.size() != g.spec.count()) {
    throw Error("occgrid", "grid arrays do not match the grid dimensions");
  }
  std::vector<char> out{'O', 'C', 'C', 'G'};
  put(out, kGridFormatVersion);
  for (int a = 0; a < 3; ++a) put(out, g.spec.origin[a]);
  put(out, g.spec.voxel_size);
  for (int a = 0; a < 3; ++a) put(out, static_cast<std::int32_t>(g.spec.dims[a]));
  std::vector<std::uint32_t> runs;
  bool state = false;
  std::uint32_t len = 0;
  for (auto o : g.occupied) {
    if ((o != 0) != state) {
      runs.push_back(len);
      state = !state;
      len = 0;
    }
    ++len;
  }
  runs.push_back(len);
  put(out, static_cast<std::uint64_t>(runs.size()));
  for (auto r : runs) put(out, r);
  const auto occ = g.occupied_indices();
  put(out, static_cast<std::uint64_t>(occ.size()));
  for (auto i : occ) out.push_back(static_cast<char>(g.label[i]));
  return out;
}

VoxelGrid decode_grid(std::span<const char> bytes) {
  Reader r(bytes);
  const auto magic = r.take(4, "magic");
  if (std::memcmp(magic.data(), "OCCG", 4) != 0) throw IoError("not a grid file (bad magic)");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kGridFormatVersion) throw IoError("unsupported grid version " + std::to_string(version));
  GridSpec spec;
  for (int a = 0; a < 3; ++a) spec.origin[a] = r.get<double>("origin");
  spec.voxel_size = r.get<double>("voxel size");
  for (int a = 0; a < 3; ++a) spec.dims[a] = r.get<std::int32_t>("dims");
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    throw IoError(std::string("invalid grid header: ") + e.what());
  }
  if (spec.count() > (std::size_t{1} << 32)) throw IoError("grid header too large");
  VoxelGrid g(spec);
  const auto n_runs = r.get<std::uint64_t>("run count");
  if (n_runs > spec.count() + 1) throw IoError("run count exceeds voxel count");
  std::size_t pos = 0;
  bool state = false;
  for (std::uint64_t i = 0; i < n_runs; ++i) {
    const auto len = r.get<std::uint32_t>("runs");
    if (len > spec.count() - pos) throw IoError("runs exceed voxel count");
    if (state) std::fill_n(g.occupied.begin() + static_cast<std::ptrdiff_t>(pos), len, std::uint8_t{1});
    pos += len;
    state = !state;
  }
  if (pos != spec.count()) throw IoError("runs do not cover the grid");
  const auto n_occ = r.get<std::uint64_t>("label count");
  const auto occ = g.occupied_indices();
  if (n_occ != occ.size()) throw IoError("label count does not match occupancy");
  const auto labels = r.take(static_cast<std::size_t>(n_occ), "labels");
  for (std::size_t i = 0; i < occ.size(); ++i) g.label[occ[i]] = static_cast<std::uint8_t>(labels[i]);
  if (!r.done()) throw IoError("trailing bytes after grid");
  return g;
}

void write_grid(const VoxelGrid& g, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto bytes = encode_grid(g);
  dataset::write_file_bytes(path, bytes);
}

VoxelGrid read_grid(const std::filesystem::path& path) {
  const auto bytes = dataset::read_file_bytes(path);
  return decode_grid(bytes);
}

std::array<std::uint8_t, 3> class_color(std::uint8_t tag) {
  // nuScenes lidarseg palette for the tags the pipeline can emit.
  switch (tag) {
    case 0: return {0, 0, 0};
    case 1: return {70, 130, 180};
    case 2: return {0, 0, 230};
    case 9: return {112, 128, 144};
    case 12: return {47, 79, 79};
    case 14: return {220, 20, 60};
    case 15: return {255, 127, 80};
    case 16: return {255, 158, 0};
    case 17: return {255, 158, 0};
    case 18: return {233, 150, 70};
    case 21: return {255, 61, 99};
    case 22: return {0, 0, 230};
    case 24: return {0, 207, 191};
    case 25: return {175, 0, 75};
    case 26: return {75, 0, 75};
    case 27: return {112, 180, 60};
    case 28: return {222, 184, 135};
    case 29: return {255, 228, 196};
    case 30: return {0, 175, 0};
    case 31: return {255, 240, 245};
    default: return {128, 128, 128};
  }
}

void write_grid_ply(const VoxelGrid& g, const std::filesystem::path& path) {
  std::vector<Vec3> pts;
  std::vector<std::array<std::uint8_t, 3>> colors;
  for (auto i : g.occupied_indices()) {
    pts.push_back(g.spec.center(g.spec.unravel(i)));
    colors.push_back(class_color(g.label[i]));
  }
  densify::write_ply_points(pts, colors, path);
}

}  // namespace parkocc::occ
