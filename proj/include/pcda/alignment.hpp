#pragma once

#include <cstdint>
#include <vector>

#include "pcda/core.hpp"

namespace pcda {

inline constexpr double kEpsNorm = 1e-12;

/// Trainable point embeddings against frozen guided embeddings. Rows with
/// covered[i] == 0 are ignored on both sides.
struct AlignmentBatch {
  EmbeddingMatrix f_point;
  EmbeddingMatrix f_guided;
  std::vector<std::uint8_t> covered;
};

struct AlignmentResult {
  double loss = 0.0;
  EmbeddingMatrix grad;  // d loss / d f_point; zero rows where uncovered
  std::size_t num_covered = 0;
};

/// Mean over covered rows of 1 - cos(f_guided[i], f_point[i]).
/// Throws DataError("DegenerateNorm") when a covered row has norm <= kEpsNorm.
AlignmentResult align_loss(const EmbeddingMatrix& f_point, const EmbeddingMatrix& f_guided,
                           const std::vector<std::uint8_t>& covered);

inline AlignmentResult align_loss(const AlignmentBatch& batch) {
  return align_loss(batch.f_point, batch.f_guided, batch.covered);
}

/// Mean cosine similarity over covered rows (0 if none); for diagnostics.
double mean_cosine(const EmbeddingMatrix& f_point, const EmbeddingMatrix& f_guided,
                   const std::vector<std::uint8_t>& covered);

}  // namespace pcda
