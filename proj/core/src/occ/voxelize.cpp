#include "parkocc/occ/voxelize.hpp"

#include <array>

#include "parkocc/error.hpp"
#include "parkocc/util/kdtree.hpp"
#include "parkocc/util/parallel.hpp"

namespace parkocc::occ {

namespace {

constexpr std::uint32_t kDropped = 0xffffffffu;

std::vector<std::uint32_t> cell_indices(std::span<const Vec3> points, const GridSpec& spec) {
  spec.validate();
  if (spec.count() >= kDropped) throw Error("occgrid", "grid too large");
  std::vector<std::uint32_t> cells(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto c = spec.locate(points[i]);
    cells[i] = c ? static_cast<std::uint32_t>(spec.linear(*c)) : kDropped;
  }
  return cells;
}

}  // namespace

VoxelGrid voxelize(std::span<const Vec3> points, std::span<const std::uint8_t> labels, const GridSpec& spec) {
  if (labels.size() != points.size()) throw Error("occgrid", "one label per point required");
  const auto cells = cell_indices(points, spec);
  VoxelGrid g(spec);
  // Bucket points by voxel (counting sort) and vote per voxel.
  std::vector<std::uint32_t> start(spec.count() + 1, 0);
  for (auto c : cells) {
    if (c != kDropped) ++start[c + 1];
  }
  for (std::size_t v = 0; v < spec.count(); ++v) start[v + 1] += start[v];
  std::vector<std::uint8_t> bucket(start.back());
  std::vector<std::uint32_t> fill(start.begin(), start.end() - 1);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i] != kDropped) bucket[fill[cells[i]]++] = labels[i];
  }
  std::array<std::uint32_t, 256> votes{};
  for (std::size_t v = 0; v < spec.count(); ++v) {
    const std::uint32_t b = start[v], e = start[v + 1];
    if (b == e) continue;
    if (e - b == 1) {
      g.set(v, bucket[b]);
      continue;
    }
    for (std::uint32_t i = b; i < e; ++i) ++votes[bucket[i]];
    std::uint32_t best_n = 0;
    std::uint8_t best = 0;
    for (std::uint32_t i = b; i < e; ++i) {
      const std::uint8_t l = bucket[i];
      if (votes[l] > best_n || (votes[l] == best_n && l < best)) {
        best_n = votes[l];
        best = l;
      }
    }
    for (std::uint32_t i = b; i < e; ++i) votes[bucket[i]] = 0;
    g.set(v, best);
  }
  return g;
}

VoxelGrid voxelize(const stitch::LabeledCloud& cloud, const GridSpec& spec) {
  return voxelize(cloud.points, cloud.labels, spec);
}

VoxelGrid voxelize_points(std::span<const Vec3> points, const GridSpec& spec) {
  const auto cells = cell_indices(points, spec);
  VoxelGrid g(spec);
  for (auto c : cells) {
    if (c != kDropped) g.set(c, kUnlabeled);
  }
  return g;
}

void merge_occupancy(VoxelGrid& dst, const VoxelGrid& src) {
  if (!(dst.spec == src.spec)) throw Error("occgrid", "grid specs differ");
  for (std::size_t i = 0; i < src.occupied.size(); ++i) {
    if (src.occupied[i] && !dst.occupied[i]) dst.set(i, src.label[i]);
  }
}

VoxelGrid nn_label_transfer(const VoxelGrid& dense, const VoxelGrid& semantic, int jobs) {
  if (!(dense.spec == semantic.spec)) throw Error("occgrid", "nn_label_transfer: grid specs differ");
  const auto sem_idx = semantic.occupied_indices();
  if (sem_idx.empty()) throw Error("occgrid", "nn_label_transfer: semantic grid is empty");
  const GridSpec& spec = dense.spec;
  // Integer voxel coordinates keep distances exact, so ties are real ties.
  std::vector<util::KdTree::Point> pts;
  std::vector<std::uint64_t> ids;
  pts.reserve(sem_idx.size());
  for (auto i : sem_idx) {
    const Index3 c = spec.unravel(i);
    pts.emplace_back(c[0], c[1], c[2]);
    ids.push_back(i);
  }
  const util::KdTree tree(std::move(pts), std::move(ids));
  VoxelGrid out = dense;
  const auto dense_idx = dense.occupied_indices();
  util::parallel_for(dense_idx.size(), jobs, [&](std::size_t n) {
    const std::size_t v = dense_idx[n];
    const Index3 c = spec.unravel(v);
    const auto nb = tree.nearest(util::KdTree::Point(c[0], c[1], c[2]));
    out.label[v] = semantic.label[nb.id];
  });
  return out;
}

VoxelGrid baseline_predict(const stitch::LabeledCloud& keyframe_scan, const GridSpec& spec) {
  return voxelize(keyframe_scan, spec);
}

}  // namespace parkocc::occ
