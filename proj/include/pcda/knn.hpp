#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pcda/core.hpp"

namespace pcda {

struct Neighbor {
  double dist2;
  std::uint32_t index;

  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
  }
};

/// Static 3-d tree over a point set. Queries return neighbours ordered by
/// (squared distance, index), which makes results identical to a
/// brute-force scan including ties.
class KdTree {
 public:
  explicit KdTree(std::span<const Vec3> points, std::size_t leaf_size = 8);

  /// k nearest points to points[query], excluding the query itself.
  std::vector<Neighbor> nearest_excluding(std::size_t query, std::size_t k) const;

 private:
  struct Node {
    std::uint32_t begin, end;  // range into order_
    std::int32_t left = -1, right = -1;
    int axis = -1;             // -1 for leaves
    double split = 0.0;
  };

  struct Entry {
    Vec3 p;
    std::uint32_t index;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::int32_t node, const Vec3& q, std::size_t self, std::size_t k,
              std::vector<Neighbor>& heap) const;

  std::span<const Vec3> points_;
  std::size_t leaf_size_;
  std::vector<Entry> entries_;  // points in tree order
  std::vector<Node> nodes_;
};

}  // namespace pcda
