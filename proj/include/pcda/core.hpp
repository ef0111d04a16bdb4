#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

namespace pcda {

/// Label sentinel for points that take part in no loss and no metric.
inline constexpr int kIgnore = -1;

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec2 = Eigen::Vector2d;

/// Error raised for malformed data: bad files, broken invariants,
/// degenerate inputs. `kind()` is the stable error name (e.g. "BadMagic").
class DataError : public std::runtime_error {
 public:
  DataError(std::string kind, const std::string& detail)
      : std::runtime_error(kind + ": " + detail), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct PointCloud {
  std::vector<Vec3> positions;
  std::optional<std::vector<double>> intensity;
  std::optional<std::vector<int>> labels;

  std::size_t size() const noexcept { return positions.size(); }
  bool empty() const noexcept { return positions.empty(); }
  bool has_intensity() const noexcept { return intensity.has_value(); }
  bool has_labels() const noexcept { return labels.has_value(); }
};

struct CameraCalibration {
  Mat3 intrinsic = Mat3::Identity();
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  int width = 1;
  int height = 1;
};

/// Dense h x w x c grid, row-major over (row, column, channel).
struct FeatureMap {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> data;

  FeatureMap() = default;
  FeatureMap(int h, int w, int c)
      : height(h), width(w), channels(c),
        data(static_cast<std::size_t>(h) * w * c, 0.0f) {}

  std::size_t offset(int row, int col) const noexcept {
    return (static_cast<std::size_t>(row) * width + col) * channels;
  }
  std::span<const float> at(int row, int col) const {
    return {data.data() + offset(row, col), static_cast<std::size_t>(channels)};
  }
  std::span<float> at(int row, int col) {
    return {data.data() + offset(row, col), static_cast<std::size_t>(channels)};
  }
};

/// Per-pixel instance ids; 0 is background.
struct MaskMap {
  int height = 0;
  int width = 0;
  std::vector<std::uint16_t> ids;

  MaskMap() = default;
  MaskMap(int h, int w)
      : height(h), width(w), ids(static_cast<std::size_t>(h) * w, 0) {}

  std::uint16_t at(int row, int col) const {
    return ids[static_cast<std::size_t>(row) * width + col];
  }
  std::uint16_t& at(int row, int col) {
    return ids[static_cast<std::size_t>(row) * width + col];
  }
  /// Sorted distinct nonzero ids.
  std::vector<std::uint16_t> instance_ids() const;
};

/// Row-major n x d matrix of per-point features.
struct EmbeddingMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t n, std::size_t d) : rows(n), cols(d), data(n * d, 0.0) {}

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

struct CameraView {
  CameraCalibration calib;
  FeatureMap features;
  std::optional<MaskMap> mask;
};

enum class Domain { Source, Target };

const char* to_string(Domain d) noexcept;
std::optional<Domain> parse_domain(std::string_view s) noexcept;

struct DomainSample {
  PointCloud cloud;
  std::vector<CameraView> views;
  Domain domain = Domain::Source;
  std::int64_t sample_id = 0;
};

struct Violation {
  std::string type;
  std::string field;
  std::string condition;

  std::string describe() const { return type + "." + field + ": " + condition; }
  bool operator==(const Violation&) const = default;
};

inline constexpr double kRotationTolerance = 1e-6;

std::vector<Violation> validate(const PointCloud& cloud, int num_classes = -1);
std::vector<Violation> validate(const CameraCalibration& calib);
std::vector<Violation> validate(const FeatureMap& fm);
std::vector<Violation> validate(const MaskMap& mm);
std::vector<Violation> validate(const EmbeddingMatrix& m);

/// Checks every invariant of the sample and its parts. Pure; never throws.
std::vector<Violation> validate(const DomainSample& sample, int num_classes = -1);

/// Throws DataError("InvariantViolation") listing all violations, if any.
void require_valid(const DomainSample& sample, int num_classes = -1);

}  // namespace pcda
