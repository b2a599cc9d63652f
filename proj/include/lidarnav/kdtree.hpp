// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0
//
// Static k-d tree with exact k-nearest and radius queries. Results are
// ordered by (squared distance, point index), so ties resolve to the lower
// index and every query agrees with a brute-force scan.

#ifndef LIDARNAV_KDTREE_HPP_
#define LIDARNAV_KDTREE_HPP_

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

namespace lidarnav {

struct Neighbor {
  std::size_t index = 0;
  double sq_distance = 0.0;

  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    return a.sq_distance < b.sq_distance ||
           (a.sq_distance == b.sq_distance && a.index < b.index);
  }
  friend bool operator==(const Neighbor& a, const Neighbor& b) = default;
};

template <int Dim>
class KdTree {
 public:
  using Point = std::array<double, Dim>;

  KdTree() = default;

  explicit KdTree(std::vector<Point> points, std::size_t leaf_size = 10)
      : leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
    const std::size_t n = points.size();
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    if (n > 0) {
      nodes_.reserve(2 * n / leaf_size_ + 2);
      build(points, order, 0, n);
    }
    // Store coordinates in tree order for locality.
    coords_.resize(n * Dim);
    index_ = std::move(order);
    for (std::size_t i = 0; i < n; ++i) {
      std::copy(points[index_[i]].begin(), points[index_[i]].end(),
                coords_.begin() + i * Dim);
    }
  }

  std::size_t size() const { return index_.size(); }
  bool empty() const { return index_.empty(); }

  Point point(std::size_t original_index) const {
    // Linear lookup is only used in tests; queries never call this.
    for (std::size_t i = 0; i < index_.size(); ++i) {
      if (index_[i] == original_index) {
        Point p;
        std::copy_n(coords_.begin() + i * Dim, Dim, p.begin());
        return p;
      }
    }
    return {};
  }

  /// Up to k nearest neighbors, sorted ascending.
  void knn(const Point& query, std::size_t k, std::vector<Neighbor>& out) const {
    out.clear();
    if (k == 0 || empty()) return;
    KnnState state{query, k, out};
    search_knn(0, state);
  }

  std::vector<Neighbor> knn(const Point& query, std::size_t k) const {
    std::vector<Neighbor> out;
    knn(query, k, out);
    return out;
  }

  /// All points with squared distance <= radius^2, sorted ascending.
  void radius(const Point& query, double radius, std::vector<Neighbor>& out) const {
    out.clear();
    if (empty() || radius < 0.0) return;
    search_radius(0, query, radius * radius, out);
    std::sort(out.begin(), out.end());
  }

  std::vector<Neighbor> radius(const Point& query, double r) const {
    std::vector<Neighbor> out;
    radius(query, r, out);
    return out;
  }

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t split_dim = -1;  // -1 marks a leaf
    double split_value = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
  };

  struct KnnState {
    const Point& query;
    std::size_t k;
    std::vector<Neighbor>& best;

    double worst() const {
      return best.size() < k ? std::numeric_limits<double>::infinity()
                             : best.back().sq_distance;
    }
    void offer(const Neighbor& n) {
      if (best.size() == k) {
        if (!(n < best.back())) return;
        best.pop_back();
      }
      best.insert(std::upper_bound(best.begin(), best.end(), n), n);
    }
  };

  std::uint32_t build(const std::vector<Point>& pts, std::vector<std::uint32_t>& order,
                      std::size_t begin, std::size_t end) {
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({static_cast<std::uint32_t>(begin), static_cast<std::uint32_t>(end)});
    if (end - begin <= leaf_size_) return id;

    Point lo, hi;
    lo.fill(std::numeric_limits<double>::infinity());
    hi.fill(-std::numeric_limits<double>::infinity());
    for (std::size_t i = begin; i < end; ++i) {
      for (int d = 0; d < Dim; ++d) {
        lo[d] = std::min(lo[d], pts[order[i]][d]);
        hi[d] = std::max(hi[d], pts[order[i]][d]);
      }
    }
    int dim = 0;
    for (int d = 1; d < Dim; ++d) {
      if (hi[d] - lo[d] > hi[dim] - lo[dim]) dim = d;
    }
    if (hi[dim] - lo[dim] <= 0.0) return id;  // all coincident: stay a leaf

    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                       return pts[a][dim] < pts[b][dim];
                     });
    const double split = pts[order[mid]][dim];
    const std::uint32_t left = build(pts, order, begin, mid);
    const std::uint32_t right = build(pts, order, mid, end);
    Node& node = nodes_[id];
    node.split_dim = dim;
    node.split_value = split;
    node.left = left;
    node.right = right;
    return id;
  }

  double sq_dist(const Point& q, std::size_t slot) const {
    const double* c = coords_.data() + slot * Dim;
    double s = 0.0;
    for (int d = 0; d < Dim; ++d) {
      const double diff = q[d] - c[d];
      s += diff * diff;
    }
    return s;
  }

  // Left subtree holds values <= split, right holds values >= split, so the
  // plane distance is a valid lower bound for both sides.
  void search_knn(std::uint32_t id, KnnState& st) const {
    const Node& node = nodes_[id];
    if (node.split_dim < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        st.offer({index_[i], sq_dist(st.query, i)});
      }
      return;
    }
    const double diff = st.query[node.split_dim] - node.split_value;
    const std::uint32_t near = diff < 0.0 ? node.left : node.right;
    const std::uint32_t far = diff < 0.0 ? node.right : node.left;
    search_knn(near, st);
    if (diff * diff <= st.worst()) search_knn(far, st);
  }

  void search_radius(std::uint32_t id, const Point& q, double r2,
                     std::vector<Neighbor>& out) const {
    const Node& node = nodes_[id];
    if (node.split_dim < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const double d = sq_dist(q, i);
        if (d <= r2) out.push_back({index_[i], d});
      }
      return;
    }
    const double diff = q[node.split_dim] - node.split_value;
    const std::uint32_t near = diff < 0.0 ? node.left : node.right;
    const std::uint32_t far = diff < 0.0 ? node.right : node.left;
    search_radius(near, q, r2, out);
    if (diff * diff <= r2) search_radius(far, q, r2, out);
  }

  std::size_t leaf_size_ = 10;
  std::vector<Node> nodes_;
  std::vector<double> coords_;
  std::vector<std::uint32_t> index_;
};

}  // namespace lidarnav

#endif  // LIDARNAV_KDTREE_HPP_
