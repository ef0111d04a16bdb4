#include "pcda/metrics.hpp"

#include <cstdio>
#include <numeric>
#include <sstream>

#include "pcda/core.hpp"

namespace pcda {

ConfusionMatrix::ConfusionMatrix(int num_classes)
    : classes_(num_classes), counts_(static_cast<std::size_t>(num_classes) * num_classes, 0) {
  if (num_classes < 1) throw DataError("OutOfRangeClass", "num_classes must be >= 1");
}

std::uint64_t ConfusionMatrix::total() const noexcept {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

void ConfusionMatrix::add(int gt, int pred, std::uint64_t count) {
  if (gt < 0 || gt >= classes_ || pred < 0 || pred >= classes_) {
    throw DataError("OutOfRangeClass", "pair (" + std::to_string(gt) + ", " + std::to_string(pred) + ")");
  }
  counts_[index(gt, pred)] += count;
}

void ConfusionMatrix::accumulate(std::span<const int> labels, std::span<const int> predictions) {
  if (labels.size() != predictions.size()) {
    throw DataError("ShapeMismatch", "labels and predictions differ in length");
  }
  // validate first so a bad stream leaves the matrix untouched
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == kIgnore) continue;
    if (labels[i] < 0 || labels[i] >= classes_ || predictions[i] < 0 || predictions[i] >= classes_) {
      throw DataError("OutOfRangeClass", "point " + std::to_string(i));
    }
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != kIgnore) ++counts_[index(labels[i], predictions[i])];
  }
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.classes_ != classes_) throw DataError("ShapeMismatch", "class counts differ");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::uint64_t ConfusionMatrix::support(int c) const {
  std::uint64_t s = 0;
  for (int p = 0; p < classes_; ++p) s += at(c, p);
  return s;
}

std::vector<std::optional<double>> ConfusionMatrix::iou_per_class() const {
  std::vector<std::optional<double>> out(classes_);
  for (int c = 0; c < classes_; ++c) {
    std::uint64_t tp = at(c, c), fp = 0, fn = 0;
    for (int k = 0; k < classes_; ++k) {
      if (k == c) continue;
      fp += at(k, c);
      fn += at(c, k);
    }
    std::uint64_t uni = tp + fp + fn;
    if (uni > 0) out[c] = static_cast<double>(tp) / static_cast<double>(uni);
  }
  return out;
}

double ConfusionMatrix::miou() const {
  double sum = 0.0;
  int defined = 0;
  for (const auto& iou : iou_per_class()) {
    if (iou) {
      sum += *iou;
      ++defined;
    }
  }
  return defined ? sum / defined : 0.0;
}

std::string ConfusionMatrix::report() const {
  std::ostringstream os;
  auto ious = iou_per_class();
  char buf[64];
  for (int c = 0; c < classes_; ++c) {
    if (ious[c]) {
      std::snprintf(buf, sizeof buf, "%.6f", *ious[c]);
    } else {
      std::snprintf(buf, sizeof buf, "nan");
    }
    os << c << ' ' << buf << ' ' << support(c) << '\n';
  }
  std::snprintf(buf, sizeof buf, "%.6f", miou());
  os << "miou " << buf << '\n';
  return os.str();
}

}  // namespace pcda
