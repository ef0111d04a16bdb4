#include "pcda/knn.hpp"

#include <algorithm>

namespace pcda {

KdTree::KdTree(std::span<const Vec3> points, std::size_t leaf_size)
    : points_(points), leaf_size_(std::max<std::size_t>(leaf_size, 1)), entries_(points.size()) {
  for (std::size_t i = 0; i < points.size(); ++i) entries_[i] = {points[i], static_cast<std::uint32_t>(i)};
  if (!points.empty()) {
    nodes_.reserve(2 * points.size() / leaf_size_ + 1);
    build(0, static_cast<std::uint32_t>(points.size()));
  }
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({begin, end});
  if (end - begin <= leaf_size_) return id;

  Vec3 lo = entries_[begin].p, hi = lo;
  for (std::uint32_t i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(entries_[i].p);
    hi = hi.cwiseMax(entries_[i].p);
  }
  int axis;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) return id;  // all coincident: keep as a leaf

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(entries_.begin() + begin, entries_.begin() + mid, entries_.begin() + end,
                   [axis](const Entry& a, const Entry& b) {
                     return a.p[axis] < b.p[axis] || (a.p[axis] == b.p[axis] && a.index < b.index);
                   });
  const double split = entries_[mid].p[axis];
  std::int32_t left = build(begin, mid);
  std::int32_t right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::search(std::int32_t node_id, const Vec3& q, std::size_t self, std::size_t k,
                    std::vector<Neighbor>& heap) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::uint32_t idx = entries_[i].index;
      if (idx == self) continue;
      const Vec3& p = entries_[i].p;
      const double dx = p.x() - q.x(), dy = p.y() - q.y(), dz = p.z() - q.z();
      Neighbor cand{dx * dx + dy * dy + dz * dz, idx};
      if (heap.size() < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end());
      } else if (cand < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const std::int32_t near = diff < 0 ? node.left : node.right;
  const std::int32_t far = diff < 0 ? node.right : node.left;
  search(near, q, self, k, heap);
  // Equal distances must still be visited so index tie-breaks match brute force.
  if (heap.size() < k || diff * diff <= heap.front().dist2) search(far, q, self, k, heap);
}

std::vector<Neighbor> KdTree::nearest_excluding(std::size_t query, std::size_t k) const {
  std::vector<Neighbor> heap;
  if (nodes_.empty() || k == 0) return heap;
  heap.reserve(k + 1);
  search(0, points_[query], query, k, heap);
  std::sort_heap(heap.begin(), heap.end());
  return heap;
}

}  // namespace pcda
