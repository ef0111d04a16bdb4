#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Geometry>

#include "pcda/core.hpp"
#include "pcda/encoder.hpp"
#include "pcda/rng.hpp"
#include "pcda/synth.hpp"

namespace pcda::test {

inline Mat3 random_rotation(Rng& rng) {
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  q.normalize();
  return q.toRotationMatrix();
}

inline CameraCalibration random_calibration(Rng& rng) {
  CameraCalibration c;
  c.width = static_cast<int>(rng.uniform_int(8, 160));
  c.height = static_cast<int>(rng.uniform_int(8, 160));
  c.intrinsic << rng.uniform(40, 300), rng.uniform(-2, 2), rng.uniform(0, c.width), 0.0, rng.uniform(40, 300),
      rng.uniform(0, c.height), 0.0, 0.0, 1.0;
  c.rotation = random_rotation(rng);
  c.translation = Vec3(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
  return c;
}

inline PointCloud random_cloud(Rng& rng, std::size_t n, bool intensity, bool labels, int classes = 6,
                               double extent = 20.0) {
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i)
    c.positions.emplace_back(rng.uniform(-extent, extent), rng.uniform(-extent, extent), rng.uniform(-3, 3));
  if (intensity) {
    c.intensity.emplace();
    for (std::size_t i = 0; i < n; ++i) c.intensity->push_back(rng.uniform());
  }
  if (labels) {
    c.labels.emplace();
    for (std::size_t i = 0; i < n; ++i) c.labels->push_back(static_cast<int>(rng.uniform_int(0, classes - 1)));
  }
  return c;
}

inline FeatureMap random_feature_map(Rng& rng, int h, int w, int c) {
  FeatureMap fm(h, w, c);
  for (auto& v : fm.data) v = static_cast<float>(rng.uniform(-1, 1));
  return fm;
}

inline MaskMap random_mask_map(Rng& rng, int h, int w, int max_id) {
  MaskMap mm(h, w);
  for (auto& v : mm.ids) v = static_cast<std::uint16_t>(rng.uniform_int(0, max_id));
  return mm;
}

inline EmbeddingMatrix random_matrix(Rng& rng, std::size_t n, std::size_t d, double scale = 1.0) {
  EmbeddingMatrix m(n, d);
  for (auto& v : m.data) v = rng.normal(0.0, scale);
  return m;
}

/// Small, fast synthetic domain for tests that need realistic samples.
inline synth::DomainParams tiny_domain() {
  synth::DomainParams p = synth::source_defaults();
  p.beams = 12;
  p.azimuth_steps = 48;
  p.image_size = 32;
  p.objects_min = 4;
  p.objects_max = 8;
  return p;
}

/// |a - n| / max(|a|, |n|, floor): relative error with an absolute floor for
/// entries that are numerically zero.
inline double rel_error(double analytic, double numeric, double floor = 1e-3) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Largest rel_error between `analytic` and central differences of `f` over
/// every entry of `params` (which is perturbed in place and restored).
inline double max_fd_error(std::vector<double>& params, const std::vector<double>& analytic,
                           const std::function<double()>& f, double h = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + h;
    const double up = f();
    params[i] = keep - h;
    const double down = f();
    params[i] = keep;
    worst = std::max(worst, rel_error(analytic[i], (up - down) / (2 * h)));
  }
  return worst;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("pcda_" + tag + "_" + std::to_string(std::hash<std::string>{}(tag + std::to_string(::getpid()))));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

}  // namespace pcda::test
