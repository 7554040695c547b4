#include "parkocc/densify/normals.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <unordered_map>

#include "parkocc/error.hpp"
#include "parkocc/util/kdtree.hpp"
#include "parkocc/util/parallel.hpp"

namespace parkocc::densify {

OrientedPointCloud estimate_normals(std::span<const Vec3> points, std::span<const Vec3> viewpoint_of_point,
                                    int k, int jobs) {
  if (k < 3) throw Error("densify", "normal estimation needs k >= 3");
  if (points.size() < static_cast<std::size_t>(k) + 1) {
    throw Error("densify", "too few points for normal estimation: " + std::to_string(points.size()) +
                               " < k + 1 = " + std::to_string(k + 1));
  }
  if (viewpoint_of_point.size() != points.size()) {
    throw Error("densify", "one viewpoint per point required");
  }
  const util::KdTree tree(std::vector<Vec3>(points.begin(), points.end()));
  OrientedPointCloud out;
  out.points.assign(points.begin(), points.end());
  out.normals.resize(points.size());
  out.confidence.resize(points.size());
  util::parallel_for(points.size(), jobs, [&](std::size_t i) {
    const auto nb = tree.knn(points[i], static_cast<std::size_t>(k) + 1);
    Vec3 mean = Vec3::Zero();
    for (const auto& n : nb) mean += points[n.position];
    mean /= static_cast<double>(nb.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& n : nb) {
      const Vec3 d = points[n.position] - mean;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
    es.computeDirect(cov);
    const Vec3 ev = es.eigenvalues();
    Vec3 normal = es.eigenvectors().col(0);
    double conf = ev[2] > 0 ? (ev[1] - ev[0]) / ev[2] : 0.0;
    if (!(conf > 1e-9) || !normal.allFinite() || normal.norm() < 0.5) {
      conf = 0.0;
      if (!normal.allFinite() || normal.norm() < 0.5) normal = Vec3::UnitZ();
    }
    normal.normalize();
    if (normal.dot(viewpoint_of_point[i] - points[i]) < 0) normal = -normal;
    out.normals[i] = normal;
    out.confidence[i] = std::clamp(conf, 0.0, 1.0);
  });
  return out;
}

OrientedPointCloud estimate_normals(std::span<const Vec3> points, int k, const Vec3& sensor_origin,
                                    int jobs) {
  const std::vector<Vec3> vp(points.size(), sensor_origin);
  return estimate_normals(points, vp, k, jobs);
}

OrientedPointCloud estimate_normals(const stitch::LabeledCloud& cloud, int k, int jobs) {
  cloud.check();
  std::vector<Vec3> vp(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) vp[i] = cloud.viewpoints[cloud.view[i]];
  return estimate_normals(cloud.points, vp, k, jobs);
}

namespace {

struct CellHash {
  std::size_t operator()(const std::array<long long, 3>& k) const {
    std::uint64_t h = 1469598103934665603ull;
    for (long long v : k) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

stitch::LabeledCloud voxel_downsample(const stitch::LabeledCloud& cloud, double cell) {
  cloud.check();
  if (!(cell > 0)) throw Error("densify", "downsample cell must be positive");
  std::unordered_map<std::array<long long, 3>, std::size_t, CellHash> slot;
  slot.reserve(cloud.size() / 4 + 16);
  std::vector<Vec3> sum;
  std::vector<std::size_t> count;
  stitch::LabeledCloud out;
  out.frame = cloud.frame;
  out.viewpoints = cloud.viewpoints;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    const std::array<long long, 3> key{static_cast<long long>(std::floor(p.x() / cell)),
                                       static_cast<long long>(std::floor(p.y() / cell)),
                                       static_cast<long long>(std::floor(p.z() / cell))};
    auto [it, fresh] = slot.try_emplace(key, sum.size());
    if (fresh) {
      sum.push_back(p);
      count.push_back(1);
      out.labels.push_back(cloud.labels[i]);
      out.view.push_back(cloud.view[i]);
    } else {
      sum[it->second] += p;
      ++count[it->second];
    }
  }
  out.points.resize(sum.size());
  for (std::size_t s = 0; s < sum.size(); ++s) out.points[s] = sum[s] / static_cast<double>(count[s]);
  return out;
}

}  // namespace parkocc::densify
