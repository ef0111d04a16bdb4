#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pcda {

/// Exact integer confusion counts; rows are ground truth, columns predictions.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes);

  int num_classes() const noexcept { return classes_; }
  std::uint64_t at(int gt, int pred) const { return counts_[index(gt, pred)]; }
  std::uint64_t total() const noexcept;

  /// Skips IGNORE ground truth. Throws DataError("OutOfRangeClass").
  void accumulate(std::span<const int> labels, std::span<const int> predictions);
  void add(int gt, int pred, std::uint64_t count = 1);
  void merge(const ConfusionMatrix& other);

  /// TP / (TP + FP + FN); nullopt for classes with empty union.
  std::vector<std::optional<double>> iou_per_class() const;
  /// Mean over classes with a defined IoU; 0 if none.
  double miou() const;

  /// Points of class c in the ground truth (row sum).
  std::uint64_t support(int c) const;

  /// `class_id iou count` per class (iou "nan" when undefined), then `miou x`.
  std::string report() const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t index(int gt, int pred) const {
    return static_cast<std::size_t>(gt) * classes_ + static_cast<std::size_t>(pred);
  }

  int classes_;
  std::vector<std::uint64_t> counts_;
};

}  // namespace pcda
