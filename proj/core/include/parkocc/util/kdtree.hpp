#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace parkocc::util {

/// Static 3-d tree over a point set. Queries rank candidates by
/// (squared distance, id) lexicographically, so equal distances resolve to
/// the smallest id. With integer-valued coordinates distances are exact and
/// the tie-break is exact as well.
class KdTree {
 public:
  using Point = Eigen::Vector3d;

  KdTree() = default;
  /// ids default to the point positions 0..n-1.
  explicit KdTree(std::vector<Point> points, std::vector<std::uint64_t> ids = {});

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  struct Neighbor {
    std::uint64_t id = 0;
    std::size_t position = 0;  // index into the constructor's point array
    double dist2 = std::numeric_limits<double>::infinity();
  };

  /// Nearest point; requires a non-empty tree.
  Neighbor nearest(const Point& q) const;

  /// Up to k nearest points, closest first.
  std::vector<Neighbor> knn(const Point& q, std::size_t k) const;

 private:
  struct Node {
    std::uint32_t begin, end;  // range in order_
    std::int32_t left = -1, right = -1;
    int axis = -1;
    double split = 0.0;
  };

  int build(std::uint32_t begin, std::uint32_t end);
  void nearest_rec(int node, const Point& q, Neighbor& best) const;
  void knn_rec(int node, const Point& q, std::size_t k, std::vector<Neighbor>& heap) const;

  std::vector<Point> points_;
  std::vector<std::uint64_t> ids_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace parkocc::util
