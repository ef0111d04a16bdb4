#include "pcda/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pcda {

std::vector<std::uint16_t> MaskMap::instance_ids() const {
  std::vector<std::uint16_t> out;
  std::vector<bool> seen(65536, false);
  for (auto id : ids) {
    if (id != 0 && !seen[id]) {
      seen[id] = true;
      out.push_back(id);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

const char* to_string(Domain d) noexcept {
  return d == Domain::Source ? "SOURCE" : "TARGET";
}

std::optional<Domain> parse_domain(std::string_view s) noexcept {
  if (s == "SOURCE" || s == "source") return Domain::Source;
  if (s == "TARGET" || s == "target") return Domain::Target;
  return std::nullopt;
}

namespace {

void append(std::vector<Violation>& out, std::vector<Violation> more) {
  out.insert(out.end(), std::make_move_iterator(more.begin()),
             std::make_move_iterator(more.end()));
}

}  // namespace

std::vector<Violation> validate(const PointCloud& cloud, int num_classes) {
  std::vector<Violation> out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!cloud.positions[i].allFinite()) {
      out.push_back({"PointCloud", "positions",
                     "non-finite coordinate at point " + std::to_string(i)});
      break;
    }
  }
  if (cloud.intensity) {
    if (cloud.intensity->size() != cloud.size()) {
      out.push_back({"PointCloud", "intensity", "length differs from point count"});
    } else if (!std::all_of(cloud.intensity->begin(), cloud.intensity->end(),
                            [](double v) { return std::isfinite(v); })) {
      out.push_back({"PointCloud", "intensity", "non-finite value"});
    }
  }
  if (cloud.labels) {
    if (cloud.labels->size() != cloud.size()) {
      out.push_back({"PointCloud", "labels", "length differs from point count"});
    } else {
      for (int l : *cloud.labels) {
        bool bad = l < kIgnore || (num_classes > 0 && l >= num_classes);
        if (bad) {
          out.push_back({"PointCloud", "labels",
                         "label " + std::to_string(l) + " outside [0, num_classes) and not IGNORE"});
          break;
        }
      }
    }
  }
  return out;
}

std::vector<Violation> validate(const CameraCalibration& calib) {
  std::vector<Violation> out;
  const Mat3& k = calib.intrinsic;
  if (!k.allFinite() || k(2, 2) != 1.0 || k(2, 0) != 0.0 || k(2, 1) != 0.0) {
    out.push_back({"CameraCalibration", "intrinsic", "last row must be (0, 0, 1)"});
  }
  const Mat3& r = calib.rotation;
  if (!r.allFinite()) {
    out.push_back({"CameraCalibration", "rotation", "non-finite entry"});
  } else {
    double ortho = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
    if (ortho > kRotationTolerance) {
      out.push_back({"CameraCalibration", "rotation", "not orthonormal"});
    } else if (std::abs(r.determinant() - 1.0) > kRotationTolerance) {
      out.push_back({"CameraCalibration", "rotation", "determinant is not +1"});
    }
  }
  if (!calib.translation.allFinite()) {
    out.push_back({"CameraCalibration", "translation", "non-finite entry"});
  }
  if (calib.width < 1) out.push_back({"CameraCalibration", "width", "must be >= 1"});
  if (calib.height < 1) out.push_back({"CameraCalibration", "height", "must be >= 1"});
  return out;
}

std::vector<Violation> validate(const FeatureMap& fm) {
  std::vector<Violation> out;
  if (fm.height < 1 || fm.width < 1 || fm.channels < 1) {
    out.push_back({"FeatureMap", "dims", "height, width, channels must be positive"});
  }
  std::size_t expect = static_cast<std::size_t>(std::max(fm.height, 0)) *
                       std::max(fm.width, 0) * std::max(fm.channels, 0);
  if (fm.data.size() != expect) {
    out.push_back({"FeatureMap", "data", "length differs from h*w*c"});
  }
  if (!std::all_of(fm.data.begin(), fm.data.end(), [](float v) { return std::isfinite(v); })) {
    out.push_back({"FeatureMap", "data", "non-finite entry"});
  }
  return out;
}

std::vector<Violation> validate(const MaskMap& mm) {
  std::vector<Violation> out;
  if (mm.height < 1 || mm.width < 1) {
    out.push_back({"MaskMap", "dims", "height and width must be positive"});
  }
  if (mm.ids.size() != static_cast<std::size_t>(std::max(mm.height, 0)) * std::max(mm.width, 0)) {
    out.push_back({"MaskMap", "ids", "length differs from h*w"});
  }
  return out;
}

std::vector<Violation> validate(const EmbeddingMatrix& m) {
  std::vector<Violation> out;
  if (m.data.size() != m.rows * m.cols) {
    out.push_back({"EmbeddingMatrix", "data", "length differs from n*d"});
  }
  if (!std::all_of(m.data.begin(), m.data.end(), [](double v) { return std::isfinite(v); })) {
    out.push_back({"EmbeddingMatrix", "data", "non-finite entry"});
  }
  return out;
}

std::vector<Violation> validate(const DomainSample& sample, int num_classes) {
  std::vector<Violation> out = validate(sample.cloud, num_classes);
  if (sample.domain == Domain::Source && !sample.cloud.has_labels()) {
    out.push_back({"DomainSample", "labels", "SOURCE sample must carry labels"});
  }
  for (std::size_t v = 0; v < sample.views.size(); ++v) {
    const CameraView& view = sample.views[v];
    append(out, validate(view.calib));
    append(out, validate(view.features));
    if (view.features.height != view.calib.height || view.features.width != view.calib.width) {
      out.push_back({"DomainSample", "views[" + std::to_string(v) + "]",
                     "feature map grid differs from calibration image size"});
    }
    if (view.mask) {
      append(out, validate(*view.mask));
      if (view.mask->height != view.features.height || view.mask->width != view.features.width) {
        out.push_back({"MaskMap", "dims", "differs from paired FeatureMap grid"});
      }
    }
  }
  return out;
}

void require_valid(const DomainSample& sample, int num_classes) {
  auto violations = validate(sample, num_classes);
  if (violations.empty()) return;
  std::ostringstream msg;
  msg << "sample " << sample.sample_id << ":";
  for (const auto& v : violations) msg << " [" << v.describe() << "]";
  throw DataError("InvariantViolation", msg.str());
}

}  // namespace pcda
