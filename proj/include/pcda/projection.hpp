#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pcda/core.hpp"

namespace pcda {

/// Points whose camera-frame depth is at or below this are never visible.
inline constexpr double kEpsDepth = 1e-6;

/// Result of projecting a cloud into one camera. `uv` and `depth` are only
/// meaningful where `visible` is set.
struct ProjectedPoints {
  std::vector<Vec2> uv;  // (u = column, v = row), continuous pixels
  std::vector<double> depth;
  std::vector<std::uint8_t> visible;
  int view_index = 0;

  std::size_t size() const noexcept { return uv.size(); }
};

/// q = R x + T; p = K q; uv = p.xy / p.z; visible iff q.z > kEpsDepth and
/// uv lies in [0, width-1] x [0, height-1].
ProjectedPoints project_points(const PointCloud& cloud, const CameraCalibration& calib);

/// Per-point view assignment; view == -1 marks an uncovered point.
struct ViewAssignment {
  std::vector<int> view;
  std::vector<Vec2> uv;
  std::vector<double> depth;

  std::size_t size() const noexcept { return view.size(); }
  bool covered(std::size_t i) const noexcept { return view[i] >= 0; }
};

/// Assigns each point to the first view (in order) where it is visible.
ViewAssignment project_to_views(const PointCloud& cloud, std::span<const CameraView> views);

/// Bilinear lookup of the c-vector at each continuous (u, v). Throws
/// DataError("OutOfBounds") if any query lies outside the grid.
EmbeddingMatrix sample_features(const FeatureMap& fm, std::span<const Vec2> uv);

/// Nearest-pixel instance id at (round(v), round(u)). OutOfBounds as above.
std::vector<std::uint16_t> point_mask_ids(const MaskMap& mm, std::span<const Vec2> uv);

/// Guided features for every point of a sample: each covered point is
/// sampled from the feature map of its assigned view.
struct GuidedFeatures {
  EmbeddingMatrix features;  // rows of uncovered points are zero
  std::vector<std::uint8_t> covered;
};

GuidedFeatures guided_features(const DomainSample& sample);

/// Per-point instance key for the sample's masked views: (view << 16) | id,
/// 0 where the point is uncovered, its view has no mask, or the pixel is
/// background.
std::vector<std::uint32_t> point_instance_keys(const DomainSample& sample);

}  // namespace pcda
