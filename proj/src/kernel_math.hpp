#pragma once

// Per-element arithmetic shared by the OpenMP kernels and the serial
// reference kernels, so the two differ only in loop scheduling.

#include <algorithm>
#include <cmath>

#include "pcda/core.hpp"
#include "pcda/projection.hpp"

namespace pcda::detail {

inline bool project_one(const Vec3& x, const CameraCalibration& c, Vec2& uv, double& depth) {
  Vec3 q = c.rotation * x + c.translation;
  if (!(q.z() > kEpsDepth)) return false;
  Vec3 p = c.intrinsic * q;
  uv = Vec2(p.x() / p.z(), p.y() / p.z());
  depth = p.z();
  return uv.x() >= 0.0 && uv.x() <= c.width - 1 && uv.y() >= 0.0 && uv.y() <= c.height - 1;
}

inline bool in_grid(const Vec2& uv, int w, int h) {
  return uv.x() >= 0.0 && uv.x() <= w - 1 && uv.y() >= 0.0 && uv.y() <= h - 1;
}

struct Tap {
  int x0, x1, y0, y1;
  double a, b;
};

// Border queries clamp so (x0, x1) stay valid neighbours; a, b land in [0, 1].
inline Tap bilinear_tap(const Vec2& uv, int w, int h) {
  Tap t;
  t.x0 = std::min(static_cast<int>(std::floor(uv.x())), std::max(w - 2, 0));
  t.y0 = std::min(static_cast<int>(std::floor(uv.y())), std::max(h - 2, 0));
  t.x1 = std::min(t.x0 + 1, w - 1);
  t.y1 = std::min(t.y0 + 1, h - 1);
  t.a = uv.x() - t.x0;
  t.b = uv.y() - t.y0;
  return t;
}

inline void bilinear_eval(const FeatureMap& fm, const Vec2& uv, double* out) {
  Tap t = bilinear_tap(uv, fm.width, fm.height);
  const double w00 = (1.0 - t.a) * (1.0 - t.b);
  const double w10 = t.a * (1.0 - t.b);
  const double w01 = (1.0 - t.a) * t.b;
  const double w11 = t.a * t.b;
  auto f00 = fm.at(t.y0, t.x0), f10 = fm.at(t.y0, t.x1);
  auto f01 = fm.at(t.y1, t.x0), f11 = fm.at(t.y1, t.x1);
  for (int ch = 0; ch < fm.channels; ++ch) {
    out[ch] = w00 * f00[ch] + w10 * f10[ch] + w01 * f01[ch] + w11 * f11[ch];
  }
}

inline std::uint16_t mask_lookup(const MaskMap& mm, const Vec2& uv) {
  return mm.at(static_cast<int>(std::lround(uv.y())), static_cast<int>(std::lround(uv.x())));
}

}  // namespace pcda::detail
