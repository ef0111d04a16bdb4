#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pcda/core.hpp"
#include "pcda/encoder.hpp"
#include "pcda/metrics.hpp"
#include "pcda/mixup.hpp"

namespace pcda {

struct TrainConfig {
  int batch_size = 8;
  double lambda = 1.0;  // weight of the alignment term
  int epochs = 8;
  double mixed_proportion = 0.5;  // share of mixed clouds among a step's samples
  double pseudo_threshold = 0.9;
  int pseudo_epochs = 4;
  std::uint64_t seed = 0;
  AdamWConfig adamw{3e-3, 0.9, 0.999, 1e-8, 1e-4};
  int hidden = 32;
  int knn = 8;
  int points_per_cloud = 1024;  // random subset per cloud per step; 0 keeps every point
  int num_classes = 6;
  bool augment = true;
  bool use_target = true;     // false: source-only training
  bool target_labels = false; // true: labels carried by target samples are trained on (pseudo-labels)

  std::vector<std::string> violations() const;
};

struct EpochLog {
  int epoch = 0;
  double seg_loss = 0.0;
  double align_loss = 0.0;
  double target_miou = 0.0;
};

std::string format_log(const std::vector<EpochLog>& log);

struct TrainResult {
  Model model;
  std::vector<EpochLog> log;
};

/// Joint L_seg + lambda * L_align training over source, target and (when
/// `mix` is set) hybrid-mixed clouds. Guided features for every point are
/// sampled from the views of the sample it came from, on unaugmented
/// geometry. `eval` (optional, labelled target data) fills target_miou.
/// `init` continues from an existing model instead of a fresh one.
TrainResult train(const std::vector<DomainSample>& source, const std::vector<DomainSample>& target,
                  const std::optional<MixConfig>& mix, const TrainConfig& cfg,
                  const std::vector<DomainSample>* eval = nullptr, const Model* init = nullptr);

/// Number of mixed clouds added to a step with `normal` plain samples.
int mixed_count(int normal, double proportion);

/// Confusion matrix of argmax predictions against the samples' labels.
ConfusionMatrix evaluate(const Model& model, const std::vector<DomainSample>& samples, int knn);

/// Mean cosine between F_point and guided features over covered points.
double guided_similarity(const Model& model, const std::vector<DomainSample>& samples, int knn);

struct PseudoLabelResult {
  std::vector<DomainSample> samples;
  double kept_fraction = 0.0;
};

/// Labels each point with its argmax when the top softmax probability is
/// >= threshold, IGNORE otherwise.
PseudoLabelResult pseudo_labels(const Model& model, const std::vector<DomainSample>& target, double threshold,
                                int knn);
std::vector<int> threshold_predictions(const EmbeddingMatrix& logits, double threshold);

std::vector<DomainSample> strip_labels(std::vector<DomainSample> samples);

}  // namespace pcda
