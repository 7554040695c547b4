#include "parkocc/util/kdtree.hpp"

#include <algorithm>

#include "parkocc/error.hpp"

namespace parkocc::util {

namespace {

constexpr std::uint32_t kLeafSize = 8;

bool better(double d2, std::uint64_t id, const KdTree::Neighbor& b) {
  return d2 < b.dist2 || (d2 == b.dist2 && id < b.id);
}

struct WorseFirst {
  bool operator()(const KdTree::Neighbor& a, const KdTree::Neighbor& b) const {
    return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.id < b.id);
  }
};

}  // namespace

KdTree::KdTree(std::vector<Point> points, std::vector<std::uint64_t> ids)
    : points_(std::move(points)), ids_(std::move(ids)) {
  if (ids_.empty()) {
    ids_.resize(points_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) ids_[i] = i;
  }
  if (ids_.size() != points_.size()) throw Error("kdtree", "ids and points differ in length");
  if (points_.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw Error("kdtree", "too many points");
  }
  order_.resize(points_.size());
  for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    build(0, static_cast<std::uint32_t>(points_.size()));
  }
}

int KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({begin, end});
  if (end - begin <= kLeafSize) return id;
  Point lo = points_[order_[begin]], hi = lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) return id;  // all points coincide
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) { return points_[a][axis] < points_[b][axis]; });
  const double split = points_[order_[mid]][axis];
  const int l = build(begin, mid);
  const int r = build(mid, end);
  nodes_[static_cast<std::size_t>(id)].axis = axis;
  nodes_[static_cast<std::size_t>(id)].split = split;
  nodes_[static_cast<std::size_t>(id)].left = l;
  nodes_[static_cast<std::size_t>(id)].right = r;
  return id;
}

// Left subtree holds coordinates <= split, right subtree >= split.
void KdTree::nearest_rec(int node, const Point& q, Neighbor& best) const {
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  if (n.axis < 0) {
    for (std::uint32_t i = n.begin; i < n.end; ++i) {
      const std::uint32_t p = order_[i];
      const double d2 = (points_[p] - q).squaredNorm();
      if (better(d2, ids_[p], best)) best = {ids_[p], p, d2};
    }
    return;
  }
  const double diff = q[n.axis] - n.split;
  const int first = diff <= 0 ? n.left : n.right;
  const int second = diff <= 0 ? n.right : n.left;
  nearest_rec(first, q, best);
  if (diff * diff <= best.dist2) nearest_rec(second, q, best);
}

KdTree::Neighbor KdTree::nearest(const Point& q) const {
  if (points_.empty()) throw Error("kdtree", "nearest on empty tree");
  Neighbor best;
  best.id = std::numeric_limits<std::uint64_t>::max();
  nearest_rec(0, q, best);
  return best;
}

void KdTree::knn_rec(int node, const Point& q, std::size_t k, std::vector<Neighbor>& heap) const {
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  if (n.axis < 0) {
    for (std::uint32_t i = n.begin; i < n.end; ++i) {
      const std::uint32_t p = order_[i];
      const double d2 = (points_[p] - q).squaredNorm();
      if (heap.size() < k) {
        heap.push_back({ids_[p], p, d2});
        std::push_heap(heap.begin(), heap.end(), WorseFirst{});
      } else if (better(d2, ids_[p], heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), WorseFirst{});
        heap.back() = {ids_[p], p, d2};
        std::push_heap(heap.begin(), heap.end(), WorseFirst{});
      }
    }
    return;
  }
  const double diff = q[n.axis] - n.split;
  const int first = diff <= 0 ? n.left : n.right;
  const int second = diff <= 0 ? n.right : n.left;
  knn_rec(first, q, k, heap);
  if (heap.size() < k || diff * diff <= heap.front().dist2) knn_rec(second, q, k, heap);
}

std::vector<KdTree::Neighbor> KdTree::knn(const Point& q, std::size_t k) const {
  std::vector<Neighbor> heap;
  if (k == 0 || points_.empty()) return heap;
  heap.reserve(k);
  knn_rec(0, q, k, heap);
  std::sort_heap(heap.begin(), heap.end(), WorseFirst{});
  return heap;
}

}  // namespace parkocc::util
