#include "pcda/reference.hpp"

#include <algorithm>
#include <string>

#include "kernel_math.hpp"

namespace pcda::reference {

ProjectedPoints project_points(const PointCloud& cloud, const CameraCalibration& calib) {
  ProjectedPoints out;
  for (const Vec3& x : cloud.positions) {
    Vec2 uv = Vec2::Zero();
    double depth = 0.0;
    const bool vis = detail::project_one(x, calib, uv, depth);
    out.uv.push_back(uv);
    out.depth.push_back(depth);
    out.visible.push_back(vis ? 1 : 0);
  }
  return out;
}

ViewAssignment project_to_views(const PointCloud& cloud, std::span<const CameraView> views) {
  ViewAssignment out;
  for (const Vec3& x : cloud.positions) {
    int view = -1;
    Vec2 uv = Vec2::Zero();
    double depth = 0.0;
    for (std::size_t v = 0; v < views.size() && view < 0; ++v) {
      if (detail::project_one(x, views[v].calib, uv, depth)) view = static_cast<int>(v);
    }
    if (view < 0) uv = Vec2::Zero(), depth = 0.0;
    out.view.push_back(view);
    out.uv.push_back(uv);
    out.depth.push_back(depth);
  }
  return out;
}

EmbeddingMatrix sample_features(const FeatureMap& fm, std::span<const Vec2> uv) {
  EmbeddingMatrix out(uv.size(), static_cast<std::size_t>(fm.channels));
  for (std::size_t i = 0; i < uv.size(); ++i) {
    if (!detail::in_grid(uv[i], fm.width, fm.height)) throw DataError("OutOfBounds", "query " + std::to_string(i));
    detail::bilinear_eval(fm, uv[i], out.row(i).data());
  }
  return out;
}

std::vector<std::uint16_t> point_mask_ids(const MaskMap& mm, std::span<const Vec2> uv) {
  std::vector<std::uint16_t> out;
  for (std::size_t i = 0; i < uv.size(); ++i) {
    if (!detail::in_grid(uv[i], mm.width, mm.height)) throw DataError("OutOfBounds", "query " + std::to_string(i));
    out.push_back(detail::mask_lookup(mm, uv[i]));
  }
  return out;
}

EmbeddingMatrix local_context(const PointCloud& cloud, int k) {
  const std::size_t n = cloud.size();
  EmbeddingMatrix ctx(n, kContextWidth);
  if (n < 2 || k < 1) return ctx;
  const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), n - 1);
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& p = cloud.positions[i];
    d.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) d.emplace_back((cloud.positions[j] - p).squaredNorm(), j);
    }
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(kk), d.end());
    double sx = 0.0, sy = 0.0, sz = 0.0;
    for (std::size_t m = 0; m < kk; ++m) {
      const Vec3& q = cloud.positions[d[m].second];
      sx += q.x() - p.x();
      sy += q.y() - p.y();
      sz += q.z() - p.z();
    }
    const double inv = 1.0 / static_cast<double>(kk);
    ctx(i, 0) = sx * inv;
    ctx(i, 1) = sy * inv;
    ctx(i, 2) = sz * inv;
  }
  return ctx;
}

ForwardPass forward(const Model& model, const EmbeddingMatrix& inputs) {
  const auto& enc = model.encoder;
  const auto& head = model.head;
  if (inputs.cols != static_cast<std::size_t>(enc.input)) throw DataError("ShapeMismatch", "encoder input width");
  const std::size_t n = inputs.rows;
  const auto in = static_cast<std::size_t>(enc.input), h = static_cast<std::size_t>(enc.hidden),
             d = static_cast<std::size_t>(enc.embed), c = static_cast<std::size_t>(head.classes);
  ForwardPass out{EmbeddingMatrix(n, h), EmbeddingMatrix(n, d), EmbeddingMatrix(n, c)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < h; ++r) {
      double s = enc.b1[r];
      for (std::size_t j = 0; j < in; ++j) s += enc.w1[r * in + j] * inputs(i, j);
      out.pre(i, r) = s;
    }
    for (std::size_t r = 0; r < d; ++r) {
      double s = enc.b2[r];
      for (std::size_t j = 0; j < h; ++j) s += enc.w2[r * h + j] * std::max(out.pre(i, j), 0.0);
      out.embed(i, r) = s;
    }
    for (std::size_t r = 0; r < c; ++r) {
      double s = head.bc[r];
      for (std::size_t j = 0; j < d; ++j) s += head.wc[r * d + j] * out.embed(i, j);
      out.logits(i, r) = s;
    }
  }
  return out;
}

ConfusionMatrix confusion(int num_classes, std::span<const int> labels, std::span<const int> preds) {
  if (labels.size() != preds.size()) throw DataError("ShapeMismatch", "labels and predictions differ in length");
  ConfusionMatrix cm(num_classes);
  for (int g = 0; g < num_classes; ++g) {
    for (int p = 0; p < num_classes; ++p) {
      std::uint64_t count = 0;
      for (std::size_t i = 0; i < labels.size(); ++i) count += labels[i] == g && preds[i] == p;
      if (count) cm.add(g, p, count);
    }
  }
  return cm;
}

}  // namespace pcda::reference
