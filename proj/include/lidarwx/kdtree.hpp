#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <queue>
#include <span>
#include <utility>
#include <vector>

namespace lidarwx {

/// Static 3-D kd-tree for exact k-nearest-neighbour queries.
///
/// Ties in distance are broken by the lower point index so results do not
/// depend on traversal order.
class KdTree3 {
 public:
  using Vec = std::array<double, 3>;

  explicit KdTree3(std::vector<Vec> points) : pts_(std::move(points)) {
    order_.resize(pts_.size());
    std::iota(order_.begin(), order_.end(), std::uint32_t{0});
    if (!pts_.empty()) root_ = build(0, order_.size(), 0);
  }

  std::size_t size() const noexcept { return pts_.size(); }
  const Vec& point(std::size_t i) const { return pts_[i]; }

  /// Indices of the k nearest points to `q`, nearest first. When
  /// `exclude` is a valid index that point is skipped.
  std::vector<std::uint32_t> knn(const Vec& q, std::size_t k,
                                 std::uint32_t exclude = 0xFFFFFFFFu) const {
    Heap heap;
    if (root_ >= 0 && k > 0) search(root_, q, k, exclude, heap);
    std::vector<std::uint32_t> out(heap.size());
    for (std::size_t i = out.size(); i-- > 0;) {
      out[i] = heap.top().second;
      heap.pop();
    }
    return out;
  }

 private:
  struct Node {
    std::uint32_t point;
    int axis;
    int left = -1;
    int right = -1;
  };
  using Entry = std::pair<double, std::uint32_t>;  // (squared distance, index), max-heap
  using Heap = std::priority_queue<Entry>;

  int build(std::size_t lo, std::size_t hi, int depth) {
    if (lo >= hi) return -1;
    // split on the axis of largest spread
    Vec mn{pts_[order_[lo]]}, mx{mn};
    for (std::size_t i = lo; i < hi; ++i) {
      for (int a = 0; a < 3; ++a) {
        mn[a] = std::min(mn[a], pts_[order_[i]][a]);
        mx[a] = std::max(mx[a], pts_[order_[i]][a]);
      }
    }
    int axis = 0;
    for (int a = 1; a < 3; ++a) {
      if (mx[a] - mn[a] > mx[axis] - mn[axis]) axis = a;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(lo),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(hi),
                     [&](std::uint32_t a, std::uint32_t b) {
                       return pts_[a][axis] < pts_[b][axis] ||
                              (pts_[a][axis] == pts_[b][axis] && a < b);
                     });
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({order_[mid], axis});
    const int l = build(lo, mid, depth + 1);
    const int r = build(mid + 1, hi, depth + 1);
    nodes_[static_cast<std::size_t>(id)].left = l;
    nodes_[static_cast<std::size_t>(id)].right = r;
    return id;
  }

  void search(int id, const Vec& q, std::size_t k, std::uint32_t exclude, Heap& heap) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    const Vec& p = pts_[n.point];
    if (n.point != exclude) {
      const double dx = p[0] - q[0], dy = p[1] - q[1], dz = p[2] - q[2];
      const Entry e{dx * dx + dy * dy + dz * dz, n.point};
      if (heap.size() < k) {
        heap.push(e);
      } else if (e < heap.top()) {
        heap.pop();
        heap.push(e);
      }
    }
    const double diff = q[n.axis] - p[n.axis];
    const int near = diff <= 0.0 ? n.left : n.right;
    const int far = diff <= 0.0 ? n.right : n.left;
    if (near >= 0) search(near, q, k, exclude, heap);
    if (far >= 0 && (heap.size() < k || diff * diff <= heap.top().first)) {
      search(far, q, k, exclude, heap);
    }
  }

  std::vector<Vec> pts_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace lidarwx
