#pragma once

// Serial, unoptimized versions of the parallel kernels. Tests compare the
// production kernels against these; the benchmark times both.

#include <span>
#include <vector>

#include "pcda/core.hpp"
#include "pcda/encoder.hpp"
#include "pcda/metrics.hpp"
#include "pcda/projection.hpp"

namespace pcda::reference {

ProjectedPoints project_points(const PointCloud& cloud, const CameraCalibration& calib);
ViewAssignment project_to_views(const PointCloud& cloud, std::span<const CameraView> views);
EmbeddingMatrix sample_features(const FeatureMap& fm, std::span<const Vec2> uv);
std::vector<std::uint16_t> point_mask_ids(const MaskMap& mm, std::span<const Vec2> uv);

/// Brute-force O(n^2) neighbor search, ties broken by index.
EmbeddingMatrix local_context(const PointCloud& cloud, int k);

ForwardPass forward(const Model& model, const EmbeddingMatrix& inputs);

/// Dense pair-counting confusion matrix.
ConfusionMatrix confusion(int num_classes, std::span<const int> labels, std::span<const int> preds);

}  // namespace pcda::reference
