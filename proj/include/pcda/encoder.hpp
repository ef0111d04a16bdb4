#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pcda/core.hpp"
#include "pcda/rng.hpp"

namespace pcda {

/// Width of the k-NN context block appended to each point's input.
inline constexpr int kContextWidth = 3;
/// x, y, z, intensity-or-zero, then the context block.
inline constexpr int kInputWidth = 4 + kContextWidth;

/// Mean offset from each point to its k nearest neighbours (k capped at
/// n - 1; a single point gets zeros). Neighbour order is fixed by
/// (distance, index).
EmbeddingMatrix local_context(const PointCloud& cloud, int k);
/// Context of the listed points only (row r belongs to points[rows[r]]),
/// neighbours still drawn from the whole cloud.
EmbeddingMatrix local_context(const PointCloud& cloud, int k, std::span<const std::uint32_t> rows);

/// Rows [x, y, z, intensity-or-zero, ctx...].
EmbeddingMatrix encoder_inputs(const PointCloud& cloud, const EmbeddingMatrix& context);

/// Two-layer rectifier MLP producing d-wide point embeddings.
struct PointEncoder {
  int input = kInputWidth;
  int hidden = 0;
  int embed = 0;
  std::vector<double> w1, b1;  // hidden x input, hidden
  std::vector<double> w2, b2;  // embed x hidden, embed

  PointEncoder() = default;
  PointEncoder(int input_width, int hidden_width, int embed_width);
};

/// Linear classifier over the point embedding.
struct SegHead {
  int embed = 0;
  int classes = 0;
  std::vector<double> wc, bc;  // classes x embed, classes

  SegHead() = default;
  SegHead(int embed_width, int num_classes);
};

struct Model {
  PointEncoder encoder;
  SegHead head;

  Model() = default;
  Model(int hidden, int embed, int classes)
      : encoder(kInputWidth, hidden, embed), head(embed, classes) {}

  /// Same shapes, all zeros (used as a gradient accumulator).
  Model zeros_like() const;

  /// W1, b1, W2, b2, Wc, bc, in checkpoint order.
  std::array<std::span<double>, 6> parameters();
  std::array<std::span<const double>, 6> parameters() const;
  std::size_t parameter_count() const;
};

/// He-style initialisation for the hidden layer, scaled Gaussian elsewhere,
/// zero biases.
Model init_model(int hidden, int embed, int classes, Rng& rng);

/// Activations kept for the backward pass.
struct ForwardPass {
  EmbeddingMatrix pre;     // n x hidden, before the rectifier
  EmbeddingMatrix embed;   // n x d, F_point
  EmbeddingMatrix logits;  // n x classes
};

/// e = W2 relu(W1 x + b1) + b2; logits = Wc e + bc, independently per row.
ForwardPass forward(const Model& model, const EmbeddingMatrix& inputs);

struct SegmentationOutput {
  EmbeddingMatrix embed;
  EmbeddingMatrix logits;
};

/// Convenience: builds context with `knn` neighbours, then runs forward.
SegmentationOutput forward(const Model& model, const PointCloud& cloud, int knn);

std::vector<int> predict(const EmbeddingMatrix& logits);

struct SegLossResult {
  double loss = 0.0;
  EmbeddingMatrix grad;  // d loss / d logits
  std::size_t num_valid = 0;
};

/// Mean cross-entropy over non-IGNORE rows via stable log-softmax.
/// Throws DataError("NoValidLabels") when every label is IGNORE.
SegLossResult seg_loss(const EmbeddingMatrix& logits, std::span<const int> labels);

/// Reverse-mode gradients of all six parameter blocks. `grad_logits` and
/// `grad_embed` are the incoming gradients of the two heads; either may be
/// an empty (0 x 0) matrix meaning zero.
Model backward(const Model& model, const EmbeddingMatrix& inputs, const ForwardPass& pass,
               const EmbeddingMatrix& grad_logits, const EmbeddingMatrix& grad_embed);

struct AdamWConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-2;
};

/// Decoupled weight decay: p *= (1 - lr * wd), then the bias-corrected
/// adaptive step. Constant learning rate.
class AdamW {
 public:
  AdamW() = default;
  explicit AdamW(AdamWConfig cfg) : cfg_(cfg) {}

  void step(std::span<double> params, std::span<const double> grads);
  void step(Model& model, const Model& grads);

  std::int64_t steps() const noexcept { return t_; }
  const std::vector<double>& first_moment() const noexcept { return m_; }
  const std::vector<double>& second_moment() const noexcept { return v_; }

 private:
  AdamWConfig cfg_;
  std::vector<double> m_, v_;
  std::int64_t t_ = 0;
};

/// "PADM" u32 input hidden embed classes c_local, then f32 parameters in
/// order W1 b1 W2 b2 Wc bc.
std::vector<std::uint8_t> encode_model(const Model& model);
Model decode_model(const std::vector<std::uint8_t>& bytes);
void write_model(const std::filesystem::path& path, const Model& model);
Model read_model(const std::filesystem::path& path);

}  // namespace pcda
