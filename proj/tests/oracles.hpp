#pragma once

// Independent brute-force evaluations used as test oracles.

#include <algorithm>
#include <cmath>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "pcda/core.hpp"
#include "pcda/mixup.hpp"
#include "pcda/projection.hpp"

namespace pcda::oracle {

/// Straight-line q = R x + T, p = K q, uv = p.xy / p.z, written out per entry.
inline bool project(const Vec3& x, const CameraCalibration& c, double& u, double& v) {
  const auto& R = c.rotation;
  const auto& K = c.intrinsic;
  const auto& T = c.translation;
  const double q0 = R(0, 0) * x[0] + R(0, 1) * x[1] + R(0, 2) * x[2] + T[0];
  const double q1 = R(1, 0) * x[0] + R(1, 1) * x[1] + R(1, 2) * x[2] + T[1];
  const double q2 = R(2, 0) * x[0] + R(2, 1) * x[1] + R(2, 2) * x[2] + T[2];
  if (!(q2 > kEpsDepth)) return false;
  const double p0 = K(0, 0) * q0 + K(0, 1) * q1 + K(0, 2) * q2;
  const double p1 = K(1, 0) * q0 + K(1, 1) * q1 + K(1, 2) * q2;
  const double p2 = K(2, 0) * q0 + K(2, 1) * q1 + K(2, 2) * q2;
  u = p0 / p2;
  v = p1 / p2;
  return true;
}

/// (1-a)(1-b) f00 + a(1-b) f10 + (1-a) b f01 + a b f11 with the cell chosen by
/// floor and pulled inside the grid on the last row/column.
inline double bilinear(const FeatureMap& fm, double u, double v, int ch) {
  int x0 = static_cast<int>(std::floor(u)), y0 = static_cast<int>(std::floor(v));
  if (x0 > fm.width - 2) x0 = std::max(fm.width - 2, 0);
  if (y0 > fm.height - 2) y0 = std::max(fm.height - 2, 0);
  const int x1 = std::min(x0 + 1, fm.width - 1), y1 = std::min(y0 + 1, fm.height - 1);
  const double a = u - x0, b = v - y0;
  return (1 - a) * (1 - b) * fm.at(y0, x0)[ch] + a * (1 - b) * fm.at(y0, x1)[ch] +
         (1 - a) * b * fm.at(y1, x0)[ch] + a * b * fm.at(y1, x1)[ch];
}

/// Mean IoU computed directly from the two streams.
inline double miou(int classes, std::span<const int> labels, std::span<const int> preds) {
  double sum = 0.0;
  int defined = 0;
  for (int c = 0; c < classes; ++c) {
    std::uint64_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == kIgnore) continue;
      const bool g = labels[i] == c, p = preds[i] == c;
      tp += g && p;
      fp += !g && p;
      fn += g && !p;
    }
    if (tp + fp + fn == 0) continue;
    sum += static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
    ++defined;
  }
  return defined ? sum / defined : 0.0;
}

/// Re-derives every mixed point's membership from its provenance: each point
/// names an existing source point with identical payload, no source point is
/// used twice, and exactly the points satisfying `keep_a` / `keep_b` appear.
template <class KeepA, class KeepB>
bool mix_membership(const MixedCloud& m, const DomainSample& a, const DomainSample& b, KeepA keep_a,
                    KeepB keep_b) {
  if (m.provenance.size() != m.cloud.size()) return false;
  std::set<std::pair<int, std::uint32_t>> used;
  std::size_t expected = 0;
  for (std::size_t i = 0; i < a.cloud.size(); ++i) expected += keep_a(i);
  for (std::size_t i = 0; i < b.cloud.size(); ++i) expected += keep_b(i);
  if (expected != m.cloud.size()) return false;
  const bool same_id = a.sample_id == b.sample_id;
  for (std::size_t k = 0; k < m.cloud.size(); ++k) {
    const Provenance& p = m.provenance[k];
    // with equal ids the first |a-part| points come from a
    int side;
    if (same_id) {
      std::size_t a_part = 0;
      for (std::size_t i = 0; i < a.cloud.size(); ++i) a_part += keep_a(i);
      side = k < a_part ? 0 : 1;
    } else if (p.sample_id == a.sample_id) {
      side = 0;
    } else if (p.sample_id == b.sample_id) {
      side = 1;
    } else {
      return false;
    }
    const DomainSample& s = side == 0 ? a : b;
    if (p.index >= s.cloud.size()) return false;
    if (!(side == 0 ? keep_a(p.index) : keep_b(p.index))) return false;
    if (!used.insert({side, p.index}).second) return false;
    if (m.cloud.positions[k] != s.cloud.positions[p.index]) return false;
    if (s.cloud.labels && m.cloud.labels && (*m.cloud.labels)[k] != (*s.cloud.labels)[p.index]) return false;
    if (s.cloud.intensity && m.cloud.intensity && (*m.cloud.intensity)[k] != (*s.cloud.intensity)[p.index])
      return false;
  }
  return true;
}

/// Membership of a recipe's mix, by its strategy's geometric predicate.
inline bool verify_mix(const MixedCloud& m, const DomainSample& a, const DomainSample& b,
                       std::span<const std::uint32_t> donor_keys = {}) {
  const double t = m.recipe.parameter;
  const auto& pa = a.cloud.positions;
  const auto& pb = b.cloud.positions;
  auto rad = [](const Vec3& p) { return std::sqrt(p.x() * p.x() + p.y() * p.y()); };
  switch (m.recipe.strategy) {
    case MixStrategy::Polar:
      return mix_membership(
          m, a, b, [&](std::size_t i) { return in_polar_arc(std::atan2(pa[i].y(), pa[i].x()), t); },
          [&](std::size_t i) { return !in_polar_arc(std::atan2(pb[i].y(), pb[i].x()), t); });
    case MixStrategy::Range:
      return mix_membership(
          m, a, b, [&](std::size_t i) { return rad(pa[i]) < t; },
          [&](std::size_t i) { return rad(pb[i]) >= t; });
    case MixStrategy::Laser:
      return mix_membership(
          m, a, b, [&](std::size_t i) { return std::atan2(pa[i].z(), rad(pa[i])) >= t; },
          [&](std::size_t i) { return std::atan2(pb[i].z(), rad(pb[i])) < t; });
    case MixStrategy::Instance: {
      // recipient b first, then donor a's points with a chosen key
      std::vector<std::uint32_t> keys(donor_keys.begin(), donor_keys.end());
      if (keys.empty()) keys = point_instance_keys(a);
      const auto& chosen = m.recipe.instances;
      auto picked = [&](std::size_t i) {
        return keys[i] != 0 && std::find(chosen.begin(), chosen.end(), keys[i]) != chosen.end();
      };
      return mix_membership(m, b, a, [](std::size_t) { return true; }, picked);
    }
  }
  return false;
}

}  // namespace pcda::oracle
