#include "pcda/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bytes.hpp"
#include "pcda/dataio.hpp"
#include "pcda/knn.hpp"

namespace pcda {

namespace {

EmbeddingMatrix context_rows(const PointCloud& cloud, int k, std::span<const std::uint32_t> rows) {
  const std::size_t n = cloud.size();
  const bool all = rows.empty();
  const std::size_t m = all ? n : rows.size();
  EmbeddingMatrix ctx(m, kContextWidth);
  if (n < 2 || k < 1) return ctx;
  const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), n - 1);
  KdTree tree(cloud.positions);
  const auto count = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t r = 0; r < count; ++r) {
    const std::size_t i = all ? static_cast<std::size_t>(r) : rows[r];
    auto nbrs = tree.nearest_excluding(i, kk);
    const Vec3& p = cloud.positions[i];
    double sx = 0.0, sy = 0.0, sz = 0.0;
    for (const auto& nb : nbrs) {
      const Vec3& q = cloud.positions[nb.index];
      sx += q.x() - p.x();
      sy += q.y() - p.y();
      sz += q.z() - p.z();
    }
    const double inv = 1.0 / static_cast<double>(nbrs.size());
    ctx(r, 0) = sx * inv;
    ctx(r, 1) = sy * inv;
    ctx(r, 2) = sz * inv;
  }
  return ctx;
}

}  // namespace

EmbeddingMatrix local_context(const PointCloud& cloud, int k) { return context_rows(cloud, k, {}); }

EmbeddingMatrix local_context(const PointCloud& cloud, int k, std::span<const std::uint32_t> rows) {
  for (auto r : rows)
    if (r >= cloud.size()) throw DataError("OutOfRange", "context row " + std::to_string(r));
  if (rows.empty()) return EmbeddingMatrix(0, kContextWidth);
  return context_rows(cloud, k, rows);
}

EmbeddingMatrix encoder_inputs(const PointCloud& cloud, const EmbeddingMatrix& context) {
  const std::size_t n = cloud.size();
  if (context.rows != n || context.cols != static_cast<std::size_t>(kContextWidth)) {
    throw DataError("ShapeMismatch", "context rows must match the cloud");
  }
  EmbeddingMatrix x(n, kInputWidth);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = x.row(i);
    row[0] = cloud.positions[i].x();
    row[1] = cloud.positions[i].y();
    row[2] = cloud.positions[i].z();
    row[3] = cloud.intensity ? (*cloud.intensity)[i] : 0.0;
    for (int c = 0; c < kContextWidth; ++c) row[4 + c] = context(i, c);
  }
  return x;
}

PointEncoder::PointEncoder(int input_width, int hidden_width, int embed_width)
    : input(input_width), hidden(hidden_width), embed(embed_width),
      w1(static_cast<std::size_t>(hidden_width) * input_width, 0.0), b1(hidden_width, 0.0),
      w2(static_cast<std::size_t>(embed_width) * hidden_width, 0.0), b2(embed_width, 0.0) {}

SegHead::SegHead(int embed_width, int num_classes)
    : embed(embed_width), classes(num_classes),
      wc(static_cast<std::size_t>(num_classes) * embed_width, 0.0), bc(num_classes, 0.0) {}

Model Model::zeros_like() const {
  Model z;
  z.encoder = PointEncoder(encoder.input, encoder.hidden, encoder.embed);
  z.head = SegHead(head.embed, head.classes);
  return z;
}

std::array<std::span<double>, 6> Model::parameters() {
  return {encoder.w1, encoder.b1, encoder.w2, encoder.b2, head.wc, head.bc};
}

std::array<std::span<const double>, 6> Model::parameters() const {
  return {encoder.w1, encoder.b1, encoder.w2, encoder.b2, head.wc, head.bc};
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (auto p : parameters()) n += p.size();
  return n;
}

Model init_model(int hidden, int embed, int classes, Rng& rng) {
  Model m(hidden, embed, classes);
  const double s1 = std::sqrt(2.0 / kInputWidth);
  const double s2 = std::sqrt(1.0 / hidden);
  const double sc = std::sqrt(1.0 / embed);
  for (auto& w : m.encoder.w1) w = rng.normal(0.0, s1);
  for (auto& w : m.encoder.w2) w = rng.normal(0.0, s2);
  for (auto& w : m.head.wc) w = rng.normal(0.0, sc);
  return m;
}

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;
using ConstMapVec = Eigen::Map<const Eigen::VectorXd>;

ConstMapMat view(const EmbeddingMatrix& m) { return {m.data.data(), static_cast<Eigen::Index>(m.rows), static_cast<Eigen::Index>(m.cols)}; }
MapMat view(EmbeddingMatrix& m) { return {m.data.data(), static_cast<Eigen::Index>(m.rows), static_cast<Eigen::Index>(m.cols)}; }
ConstMapMat weights(const std::vector<double>& w, int rows, int cols) { return {w.data(), rows, cols}; }
MapMat weights(std::vector<double>& w, int rows, int cols) { return {w.data(), rows, cols}; }

// Fixed-size row blocks keep every row's arithmetic independent of the
// thread count.
constexpr std::int64_t kForwardBlock = 256;

}  // namespace

ForwardPass forward(const Model& model, const EmbeddingMatrix& inputs) {
  const PointEncoder& enc = model.encoder;
  const SegHead& head = model.head;
  if (inputs.cols != static_cast<std::size_t>(enc.input)) {
    throw DataError("ShapeMismatch", "encoder input width mismatch");
  }
  const std::size_t n = inputs.rows;
  ForwardPass out{EmbeddingMatrix(n, enc.hidden), EmbeddingMatrix(n, enc.embed), EmbeddingMatrix(n, head.classes)};
  const ConstMapMat w1 = weights(enc.w1, enc.hidden, enc.input);
  const ConstMapMat w2 = weights(enc.w2, enc.embed, enc.hidden);
  const ConstMapMat wc = weights(head.wc, head.classes, head.embed);
  const ConstMapVec b1(enc.b1.data(), enc.hidden), b2(enc.b2.data(), enc.embed), bc(head.bc.data(), head.classes);
  const ConstMapMat x = view(inputs);
  MapMat pre = view(out.pre), emb = view(out.embed), logits = view(out.logits);
  const auto blocks = (static_cast<std::int64_t>(n) + kForwardBlock - 1) / kForwardBlock;
#pragma omp parallel for schedule(static)
  for (std::int64_t blk = 0; blk < blocks; ++blk) {
    const Eigen::Index r0 = blk * kForwardBlock;
    const Eigen::Index m = std::min<Eigen::Index>(kForwardBlock, static_cast<Eigen::Index>(n) - r0);
    auto p = pre.middleRows(r0, m);
    p.noalias() = x.middleRows(r0, m) * w1.transpose();
    p.rowwise() += b1.transpose();
    auto e = emb.middleRows(r0, m);
    e.noalias() = p.cwiseMax(0.0) * w2.transpose();
    e.rowwise() += b2.transpose();
    auto z = logits.middleRows(r0, m);
    z.noalias() = e * wc.transpose();
    z.rowwise() += bc.transpose();
  }
  return out;
}

SegmentationOutput forward(const Model& model, const PointCloud& cloud, int knn) {
  ForwardPass pass = forward(model, encoder_inputs(cloud, local_context(cloud, knn)));
  return {std::move(pass.embed), std::move(pass.logits)};
}

std::vector<int> predict(const EmbeddingMatrix& logits) {
  std::vector<int> out(logits.rows, 0);
  for (std::size_t i = 0; i < logits.rows; ++i) {
    auto z = logits.row(i);
    out[i] = static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
  }
  return out;
}

SegLossResult seg_loss(const EmbeddingMatrix& logits, std::span<const int> labels) {
  if (labels.size() != logits.rows) throw DataError("ShapeMismatch", "labels must match logits rows");
  const std::size_t n = logits.rows, c = logits.cols;
  SegLossResult r;
  r.grad = EmbeddingMatrix(n, c);
  for (int l : labels) {
    if (l == kIgnore) continue;
    if (l < 0 || static_cast<std::size_t>(l) >= c) {
      throw DataError("OutOfRangeClass", "label " + std::to_string(l));
    }
    ++r.num_valid;
  }
  if (r.num_valid == 0) throw DataError("NoValidLabels", "every label is IGNORE");
  const double inv = 1.0 / static_cast<double>(r.num_valid);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] == kIgnore) continue;
    auto z = logits.row(i);
    const double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - m);
    const double lse = m + std::log(sum);
    total += lse - z[labels[i]];
    auto g = r.grad.row(i);
    for (std::size_t k = 0; k < c; ++k) g[k] = std::exp(z[k] - lse) * inv;
    g[labels[i]] -= inv;
  }
  r.loss = total * inv;
  return r;
}

Model backward(const Model& model, const EmbeddingMatrix& inputs, const ForwardPass& pass,
               const EmbeddingMatrix& grad_logits, const EmbeddingMatrix& grad_embed) {
  const PointEncoder& enc = model.encoder;
  const SegHead& head = model.head;
  const std::size_t n = inputs.rows;
  const auto d = static_cast<std::size_t>(enc.embed), c = static_cast<std::size_t>(head.classes);
  const bool has_logits = grad_logits.rows != 0;
  const bool has_embed = grad_embed.rows != 0;
  if ((has_logits && (grad_logits.rows != n || grad_logits.cols != c)) ||
      (has_embed && (grad_embed.rows != n || grad_embed.cols != d))) {
    throw DataError("ShapeMismatch", "incoming gradients must match forward outputs");
  }
  Model g = model.zeros_like();
  if (n == 0) return g;
  RowMat ge = has_embed ? RowMat(view(grad_embed)) : RowMat::Zero(n, enc.embed);
  if (has_logits) {
    const ConstMapMat gz = view(grad_logits);
    weights(g.head.wc, head.classes, head.embed).noalias() = gz.transpose() * view(pass.embed);
    Eigen::Map<Eigen::VectorXd>(g.head.bc.data(), head.classes) = gz.colwise().sum().transpose();
    ge.noalias() += gz * weights(head.wc, head.classes, head.embed);
  }
  const ConstMapMat pre = view(pass.pre);
  const RowMat act = pre.cwiseMax(0.0);
  weights(g.encoder.w2, enc.embed, enc.hidden).noalias() = ge.transpose() * act;
  Eigen::Map<Eigen::VectorXd>(g.encoder.b2.data(), enc.embed) = ge.colwise().sum().transpose();
  RowMat gh = ge * weights(enc.w2, enc.embed, enc.hidden);
  gh = (pre.array() > 0.0).select(gh, 0.0);
  weights(g.encoder.w1, enc.hidden, enc.input).noalias() = gh.transpose() * view(inputs);
  Eigen::Map<Eigen::VectorXd>(g.encoder.b1.data(), enc.hidden) = gh.colwise().sum().transpose();
  return g;
}

void AdamW::step(std::span<double> params, std::span<const double> grads) {
  if (params.size() != grads.size()) throw DataError("ShapeMismatch", "params and grads differ");
  if (m_.size() != params.size()) {
    m_.assign(params.size(), 0.0);
    v_.assign(params.size(), 0.0);
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  const double decay = 1.0 - cfg_.learning_rate * cfg_.weight_decay;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g * g;
    const double mhat = m_[i] / bc1;
    const double vhat = v_[i] / bc2;
    params[i] = params[i] * decay - cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.eps);
  }
}

void AdamW::step(Model& model, const Model& grads) {
  std::vector<double> flat_p, flat_g;
  flat_p.reserve(model.parameter_count());
  flat_g.reserve(model.parameter_count());
  auto ps = model.parameters();
  auto gs = grads.parameters();
  for (std::size_t b = 0; b < ps.size(); ++b) {
    if (ps[b].size() != gs[b].size()) throw DataError("ShapeMismatch", "gradient block shape");
    flat_p.insert(flat_p.end(), ps[b].begin(), ps[b].end());
    flat_g.insert(flat_g.end(), gs[b].begin(), gs[b].end());
  }
  step(flat_p, flat_g);
  std::size_t off = 0;
  for (auto p : ps) {
    std::copy(flat_p.begin() + off, flat_p.begin() + off + p.size(), p.begin());
    off += p.size();
  }
}

std::vector<std::uint8_t> encode_model(const Model& model) {
  detail::ByteWriter w;
  w.magic("PADM");
  w.u32(static_cast<std::uint32_t>(model.encoder.input));
  w.u32(static_cast<std::uint32_t>(model.encoder.hidden));
  w.u32(static_cast<std::uint32_t>(model.encoder.embed));
  w.u32(static_cast<std::uint32_t>(model.head.classes));
  w.u32(static_cast<std::uint32_t>(kContextWidth));
  for (auto block : model.parameters())
    for (double v : block) w.f32(static_cast<float>(v));
  return w.take();
}

Model decode_model(const std::vector<std::uint8_t>& bytes) {
  detail::ByteReader r(bytes);
  r.expect_magic("PADM");
  const std::uint32_t input = r.u32(), hidden = r.u32(), embed = r.u32(), classes = r.u32(),
                      c_local = r.u32();
  if (c_local != static_cast<std::uint32_t>(kContextWidth) || input != 4 + c_local) {
    throw DataError("SizeMismatch", "unsupported input layout (input " + std::to_string(input) +
                                        ", c_local " + std::to_string(c_local) + ")");
  }
  if (hidden == 0 || embed == 0 || classes == 0 || hidden > (1u << 16) || embed > (1u << 16) ||
      classes > (1u << 16)) {
    throw DataError("SizeMismatch", "implausible model dimensions");
  }
  const std::uint64_t count = std::uint64_t{hidden} * input + hidden + std::uint64_t{embed} * hidden +
                              embed + std::uint64_t{classes} * embed + classes;
  if (r.remaining() != count * 4) {
    throw DataError("SizeMismatch", "parameter payload is " + std::to_string(r.remaining()) +
                                        " bytes, expected " + std::to_string(count * 4));
  }
  Model m(static_cast<int>(hidden), static_cast<int>(embed), static_cast<int>(classes));
  for (auto block : m.parameters())
    for (double& v : block) v = r.f32();
  return m;
}

void write_model(const std::filesystem::path& path, const Model& model) {
  io::write_bytes(path, encode_model(model));
}

Model read_model(const std::filesystem::path& path) { return decode_model(io::read_bytes(path)); }

}  // namespace pcda
