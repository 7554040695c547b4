#pragma once

#include <span>
#include <vector>

#include "parkocc/geom/pose.hpp"
#include "parkocc/stitch/cloud.hpp"

namespace parkocc::densify {

using geom::Vec3;

struct OrientedPointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;     // unit length
  std::vector<double> confidence;  // 0 marks a rank-deficient neighborhood

  std::size_t size() const { return points.size(); }
};

/// Normal = eigenvector of the smallest eigenvalue of the covariance of the
/// k nearest other points plus the point itself, flipped to face the point's
/// viewpoint. Confidence = (l1 - l0) / l2 over ascending eigenvalues, so
/// collinear or coincident neighborhoods score 0. Throws when fewer than k+1
/// points are given or k < 3.
OrientedPointCloud estimate_normals(std::span<const Vec3> points, int k, const Vec3& sensor_origin,
                                    int jobs = 1);
OrientedPointCloud estimate_normals(std::span<const Vec3> points, std::span<const Vec3> viewpoint_of_point,
                                    int k, int jobs = 1);
OrientedPointCloud estimate_normals(const stitch::LabeledCloud& cloud, int k, int jobs = 1);

/// One point per occupied cell of a grid with the given cell size anchored at
/// the origin: the centroid of the cell's points, keeping the first point's
/// view index. Output is in order of first appearance.
stitch::LabeledCloud voxel_downsample(const stitch::LabeledCloud& cloud, double cell);

}  // namespace parkocc::densify
