#ifndef SEMREG_SPATIAL_INDEX_HPP_
#define SEMREG_SPATIAL_INDEX_HPP_

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "semreg/common.hpp"

namespace semreg {

/// Static kd-tree over a fixed point sequence. Immutable after construction;
/// concurrent queries are safe.
class SpatialIndex {
 public:
  SpatialIndex() = default;

  explicit SpatialIndex(std::span<const Point3> points)
      : points_(points.begin(), points.end()), order_(points.size()) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    if (!points_.empty()) {
      nodes_.reserve(2 * points_.size() / kLeafSize + 2);
      build(0, points_.size());
    }
  }

  std::size_t size() const { return points_.size(); }
  const std::vector<Point3>& points() const { return points_; }

  /// Indices i with |p_i - center| <= r, ascending.
  std::vector<std::size_t> radius_neighbors(const Point3& center, double r) const {
    std::vector<std::size_t> out;
    radius_neighbors(center, r, out);
    return out;
  }

  void radius_neighbors(const Point3& center, double r, std::vector<std::size_t>& out) const {
    if (r < 0.0 || !std::isfinite(r)) throw InvalidArgument("radius_neighbors: radius must be >= 0");
    out.clear();
    if (nodes_.empty()) return;
    search_radius(0, center, r * r, out);
    std::sort(out.begin(), out.end());
  }

  /// True when at least one point lies within r of center.
  bool any_within(const Point3& center, double r) const {
    if (r < 0.0) throw InvalidArgument("any_within: radius must be >= 0");
    return !nodes_.empty() && search_any(0, center, r * r);
  }

  /// Index of the nearest point (lowest index on ties); size() when empty.
  std::size_t nearest(const Point3& center) const {
    std::size_t best = points_.size();
    double best_d2 = std::numeric_limits<double>::infinity();
    if (!nodes_.empty()) search_nearest(0, center, best, best_d2);
    return best;
  }

 private:
  static constexpr std::size_t kLeafSize = 12;

  struct Node {
    std::size_t begin, end;
    int axis = -1;  // -1 marks a leaf
    double split = 0.0;
    std::size_t left = 0, right = 0;
    Eigen::Vector3d lo, hi;
  };

  std::size_t build(std::size_t begin, std::size_t end) {
    Node node;
    node.begin = begin;
    node.end = end;
    node.lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
    node.hi = -node.lo;
    for (std::size_t i = begin; i < end; ++i) {
      node.lo = node.lo.cwiseMin(points_[order_[i]]);
      node.hi = node.hi.cwiseMax(points_[order_[i]]);
    }
    const std::size_t id = nodes_.size();
    nodes_.push_back(node);
    if (end - begin <= kLeafSize) return id;

    int axis = 0;
    (node.hi - node.lo).maxCoeff(&axis);
    if (node.hi[axis] == node.lo[axis]) return id;  // all coincident
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::size_t a, std::size_t b) { return points_[a][axis] < points_[b][axis]; });
    const double split = points_[order_[mid]][axis];
    const std::size_t left = build(begin, mid);
    const std::size_t right = build(mid, end);
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  static double box_distance2(const Node& n, const Point3& c) {
    const Eigen::Vector3d d = (n.lo - c).cwiseMax(c - n.hi).cwiseMax(0.0);
    return d.squaredNorm();
  }

  void search_radius(std::size_t id, const Point3& c, double r2, std::vector<std::size_t>& out) const {
    const Node& n = nodes_[id];
    if (box_distance2(n, c) > r2) return;
    if (n.axis < 0) {
      for (std::size_t i = n.begin; i < n.end; ++i)
        if ((points_[order_[i]] - c).squaredNorm() <= r2) out.push_back(order_[i]);
      return;
    }
    search_radius(n.left, c, r2, out);
    search_radius(n.right, c, r2, out);
  }

  bool search_any(std::size_t id, const Point3& c, double r2) const {
    const Node& n = nodes_[id];
    if (box_distance2(n, c) > r2) return false;
    if (n.axis < 0) {
      for (std::size_t i = n.begin; i < n.end; ++i)
        if ((points_[order_[i]] - c).squaredNorm() <= r2) return true;
      return false;
    }
    return search_any(n.left, c, r2) || search_any(n.right, c, r2);
  }

  void search_nearest(std::size_t id, const Point3& c, std::size_t& best, double& best_d2) const {
    const Node& n = nodes_[id];
    if (box_distance2(n, c) > best_d2) return;
    if (n.axis < 0) {
      for (std::size_t i = n.begin; i < n.end; ++i) {
        const std::size_t idx = order_[i];
        const double d2 = (points_[idx] - c).squaredNorm();
        if (d2 < best_d2 || (d2 == best_d2 && idx < best)) {
          best_d2 = d2;
          best = idx;
        }
      }
      return;
    }
    const bool left_first = c[n.axis] < n.split;
    search_nearest(left_first ? n.left : n.right, c, best, best_d2);
    search_nearest(left_first ? n.right : n.left, c, best, best_d2);
  }

  std::vector<Point3> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

inline SpatialIndex build_spatial_index(std::span<const Point3> points) { return SpatialIndex(points); }

}  // namespace semreg

#endif  // SEMREG_SPATIAL_INDEX_HPP_
