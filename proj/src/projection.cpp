#include "pcda/projection.hpp"

#include <cmath>
#include <string>

#include "kernel_math.hpp"

namespace pcda {

ProjectedPoints project_points(const PointCloud& cloud, const CameraCalibration& calib) {
  const auto n = static_cast<std::int64_t>(cloud.size());
  ProjectedPoints out;
  out.uv.assign(n, Vec2::Zero());
  out.depth.assign(n, 0.0);
  out.visible.assign(n, 0);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    out.visible[i] = detail::project_one(cloud.positions[i], calib, out.uv[i], out.depth[i]) ? 1 : 0;
  }
  return out;
}

ViewAssignment project_to_views(const PointCloud& cloud, std::span<const CameraView> views) {
  const auto n = static_cast<std::int64_t>(cloud.size());
  ViewAssignment out;
  out.view.assign(n, -1);
  out.uv.assign(n, Vec2::Zero());
  out.depth.assign(n, 0.0);
  const int nv = static_cast<int>(views.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    for (int v = 0; v < nv; ++v) {
      Vec2 uv;
      double depth;
      if (detail::project_one(cloud.positions[i], views[v].calib, uv, depth)) {
        out.view[i] = v;
        out.uv[i] = uv;
        out.depth[i] = depth;
        break;
      }
    }
  }
  return out;
}

namespace {

[[noreturn]] void out_of_bounds(std::int64_t i, const Vec2& uv) {
  throw DataError("OutOfBounds", "query " + std::to_string(i) + " at (" + std::to_string(uv.x()) + ", " +
                                     std::to_string(uv.y()) + ")");
}

}  // namespace

EmbeddingMatrix sample_features(const FeatureMap& fm, std::span<const Vec2> uv) {
  const auto k = static_cast<std::int64_t>(uv.size());
  for (std::int64_t i = 0; i < k; ++i) {
    if (!detail::in_grid(uv[i], fm.width, fm.height)) out_of_bounds(i, uv[i]);
  }
  const auto c = static_cast<std::size_t>(fm.channels);
  EmbeddingMatrix out(uv.size(), c);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < k; ++i) {
    detail::bilinear_eval(fm, uv[i], out.row(static_cast<std::size_t>(i)).data());
  }
  return out;
}

std::vector<std::uint16_t> point_mask_ids(const MaskMap& mm, std::span<const Vec2> uv) {
  const auto k = static_cast<std::int64_t>(uv.size());
  for (std::int64_t i = 0; i < k; ++i) {
    if (!detail::in_grid(uv[i], mm.width, mm.height)) out_of_bounds(i, uv[i]);
  }
  std::vector<std::uint16_t> out(uv.size(), 0);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < k; ++i) {
    out[i] = detail::mask_lookup(mm, uv[i]);
  }
  return out;
}

GuidedFeatures guided_features(const DomainSample& sample) {
  const std::size_t n = sample.cloud.size();
  GuidedFeatures g;
  g.covered.assign(n, 0);
  if (sample.views.empty()) {
    g.features = EmbeddingMatrix(n, 0);
    return g;
  }
  const std::size_t c = static_cast<std::size_t>(sample.views.front().features.channels);
  g.features = EmbeddingMatrix(n, c);
  ViewAssignment assign = project_to_views(sample.cloud, sample.views);
  for (std::size_t v = 0; v < sample.views.size(); ++v) {
    std::vector<std::size_t> idx;
    std::vector<Vec2> uv;
    for (std::size_t i = 0; i < n; ++i) {
      if (assign.view[i] == static_cast<int>(v)) {
        idx.push_back(i);
        uv.push_back(assign.uv[i]);
      }
    }
    if (idx.empty()) continue;
    const FeatureMap& fm = sample.views[v].features;
    if (static_cast<std::size_t>(fm.channels) != c) {
      throw DataError("InvariantViolation", "views of one sample disagree on feature channels");
    }
    EmbeddingMatrix f = sample_features(fm, uv);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      auto src = f.row(j);
      std::copy(src.begin(), src.end(), g.features.row(idx[j]).begin());
      g.covered[idx[j]] = 1;
    }
  }
  return g;
}

std::vector<std::uint32_t> point_instance_keys(const DomainSample& sample) {
  const std::size_t n = sample.cloud.size();
  std::vector<std::uint32_t> keys(n, 0);
  if (sample.views.empty()) return keys;
  ViewAssignment assign = project_to_views(sample.cloud, sample.views);
  for (std::size_t v = 0; v < sample.views.size(); ++v) {
    if (!sample.views[v].mask) continue;
    std::vector<std::size_t> idx;
    std::vector<Vec2> uv;
    for (std::size_t i = 0; i < n; ++i) {
      if (assign.view[i] == static_cast<int>(v)) {
        idx.push_back(i);
        uv.push_back(assign.uv[i]);
      }
    }
    auto ids = point_mask_ids(*sample.views[v].mask, uv);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      if (ids[j] != 0) keys[idx[j]] = (static_cast<std::uint32_t>(v) << 16) | ids[j];
    }
  }
  return keys;
}

}  // namespace pcda
