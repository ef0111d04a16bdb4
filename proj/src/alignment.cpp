#include "pcda/alignment.hpp"

#include <cmath>
#include <string>

namespace pcda {

namespace {

void check_shapes(const EmbeddingMatrix& a, const EmbeddingMatrix& b, std::size_t covered) {
  if (a.rows != b.rows || a.cols != b.cols || covered != a.rows) {
    throw DataError("ShapeMismatch", "alignment batch matrices and coverage must share n and d");
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

}  // namespace

AlignmentResult align_loss(const EmbeddingMatrix& f_point, const EmbeddingMatrix& f_guided,
                           const std::vector<std::uint8_t>& covered) {
  check_shapes(f_point, f_guided, covered.size());
  const std::size_t n = f_point.rows, d = f_point.cols;
  AlignmentResult r;
  r.grad = EmbeddingMatrix(n, d);
  for (std::size_t i = 0; i < n; ++i) r.num_covered += covered[i] ? 1 : 0;
  if (r.num_covered == 0) return r;

  const double inv_count = 1.0 / static_cast<double>(r.num_covered);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!covered[i]) continue;
    auto f = f_point.row(i);
    auto g = f_guided.row(i);
    const double nf = std::sqrt(dot(f, f));
    const double ng = std::sqrt(dot(g, g));
    if (!(nf > kEpsNorm) || !(ng > kEpsNorm)) {
      throw DataError("DegenerateNorm", "row " + std::to_string(i));
    }
    const double cos = dot(f, g) / (nf * ng);
    total += 1.0 - cos;
    // d(1 - cos)/df = -(g / (|g||f|) - cos f / |f|^2)
    auto out = r.grad.row(i);
    const double a = 1.0 / (ng * nf);
    const double b = cos / (nf * nf);
    for (std::size_t j = 0; j < d; ++j) out[j] = -(g[j] * a - b * f[j]) * inv_count;
  }
  r.loss = total * inv_count;
  return r;
}

double mean_cosine(const EmbeddingMatrix& f_point, const EmbeddingMatrix& f_guided,
                   const std::vector<std::uint8_t>& covered) {
  check_shapes(f_point, f_guided, covered.size());
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < f_point.rows; ++i) {
    if (!covered[i]) continue;
    auto f = f_point.row(i);
    auto g = f_guided.row(i);
    const double denom = std::sqrt(dot(f, f)) * std::sqrt(dot(g, g));
    if (denom > 0.0) total += dot(f, g) / denom;
    ++count;
  }
  return count ? total / static_cast<double>(count) : 0.0;
}

}  // namespace pcda
