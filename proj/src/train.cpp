#include "pcda/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "pcda/alignment.hpp"
#include "pcda/projection.hpp"

namespace pcda {

std::vector<std::string> TrainConfig::violations() const {
  std::vector<std::string> out;
  if (batch_size < 1) out.push_back("TrainConfig.batch_size: must be >= 1");
  if (!(mixed_proportion >= 0.0 && mixed_proportion <= 1.0)) {
    out.push_back("TrainConfig.mixed_proportion: must be in [0, 1]");
  }
  if (!(pseudo_threshold >= 0.0 && pseudo_threshold <= 1.0)) {
    out.push_back("TrainConfig.pseudo_threshold: must be in [0, 1]");
  }
  if (epochs < 0 || pseudo_epochs < 0) out.push_back("TrainConfig.epochs: must be >= 0");
  if (!(lambda >= 0.0)) out.push_back("TrainConfig.lambda: must be >= 0");
  if (points_per_cloud < 0) out.push_back("TrainConfig.points_per_cloud: must be >= 0");
  if (hidden < 1 || knn < 1 || num_classes < 1) out.push_back("TrainConfig: hidden, knn, num_classes must be >= 1");
  if (!(adamw.learning_rate > 0.0)) out.push_back("TrainConfig.learning_rate: must be positive");
  return out;
}

std::string format_log(const std::vector<EpochLog>& log) {
  std::ostringstream os;
  char buf[160];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof buf, "%d %.9f %.9f %.6f\n", e.epoch, e.seg_loss, e.align_loss, e.target_miou);
    os << buf;
  }
  return os.str();
}

int mixed_count(int normal, double proportion) {
  if (proportion <= 0.0) return 0;
  if (proportion >= 1.0) return normal;
  return static_cast<int>(std::lround(normal * proportion / (1.0 - proportion)));
}

namespace {

struct Prepared {
  const DomainSample* sample = nullptr;
  EmbeddingMatrix context;
  GuidedFeatures guided;
  std::vector<std::uint32_t> instance_keys;
};

// The points of one cloud used in a training step, before augmentation.
struct Item {
  const PointCloud* cloud = nullptr;
  PointCloud owned;  // mixed clouds live here
  std::vector<std::uint32_t> rows;
  EmbeddingMatrix context;  // per selected row
  EmbeddingMatrix guided;
  std::vector<std::uint8_t> covered;
  bool labelled = true;
};

struct Batch {
  EmbeddingMatrix inputs;
  std::vector<int> labels;
  EmbeddingMatrix guided;
  std::vector<std::uint8_t> covered;
};

std::vector<std::uint32_t> pick_rows(std::size_t n, int limit, Rng& rng) {
  std::vector<std::uint32_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0u);
  if (limit <= 0 || n <= static_cast<std::size_t>(limit)) return rows;
  const auto m = static_cast<std::size_t>(limit);
  for (std::size_t i = 0; i < m; ++i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(n) - 1));
    std::swap(rows[i], rows[j]);
  }
  rows.resize(m);
  std::sort(rows.begin(), rows.end());
  return rows;
}

Batch assemble(const std::vector<Item>& items, std::size_t embed, bool align, bool augment, Rng& rng) {
  std::size_t total = 0;
  for (const auto& it : items) total += it.rows.size();
  Batch b{EmbeddingMatrix(total, kInputWidth), std::vector<int>(total, kIgnore),
          EmbeddingMatrix(align ? total : 0, embed), std::vector<std::uint8_t>(total, 0)};
  std::size_t row = 0;
  for (const auto& it : items) {
    const PointCloud& c = *it.cloud;
    const Mat3 m = augment ? draw_augment(rng).matrix() : Mat3::Identity();
    for (std::size_t r = 0; r < it.rows.size(); ++r, ++row) {
      const std::size_t i = it.rows[r];
      auto x = b.inputs.row(row);
      // context offsets transform with the cloud (similarity maps keep k-NN sets)
      const Vec3 p = m * c.positions[i];
      const Vec3 q = m * Vec3(it.context(r, 0), it.context(r, 1), it.context(r, 2));
      x[0] = p.x();
      x[1] = p.y();
      x[2] = p.z();
      x[3] = c.intensity ? (*c.intensity)[i] : 0.0;
      x[4] = q.x();
      x[5] = q.y();
      x[6] = q.z();
      if (it.labelled && c.labels) b.labels[row] = (*c.labels)[i];
      if (align && it.covered[r]) {
        b.covered[row] = 1;
        auto src = it.guided.row(r);
        std::copy(src.begin(), src.end(), b.guided.row(row).begin());
      }
    }
  }
  return b;
}

}  // namespace

TrainResult train(const std::vector<DomainSample>& source, const std::vector<DomainSample>& target,
                  const std::optional<MixConfig>& mix, const TrainConfig& cfg,
                  const std::vector<DomainSample>* eval, const Model* init) {
  auto problems = cfg.violations();
  if (!problems.empty()) throw DataError("InvalidConfig", problems.front());
  if (mix) {
    auto mp = mix->violations();
    if (!mp.empty()) throw DataError("InvalidConfig", mp.front());
  }
  if (source.empty()) throw DataError("InvalidArgument", "training needs at least one source sample");
  for (const auto& s : source) {
    if (!s.cloud.has_labels()) throw DataError("InvariantViolation", "source sample without labels");
  }
  const bool use_target = cfg.use_target && !target.empty();
  const bool align = cfg.lambda > 0.0;
  const bool mixing = mix.has_value() && use_target && cfg.mixed_proportion > 0.0;

  // Embedding width follows the feature maps when alignment is on.
  std::size_t embed = 16;
  if (init) {
    embed = static_cast<std::size_t>(init->encoder.embed);
  } else {
    for (const auto& s : source) {
      if (!s.views.empty()) {
        embed = static_cast<std::size_t>(s.views.front().features.channels);
        break;
      }
    }
  }

  Rng rng(cfg.seed);
  Rng init_rng = rng.split();
  Model model = init ? *init : init_model(cfg.hidden, static_cast<int>(embed), cfg.num_classes, init_rng);
  if (model.head.classes != cfg.num_classes) {
    throw DataError("ShapeMismatch", "model class count differs from configuration");
  }
  AdamW opt(cfg.adamw);

  std::vector<Prepared> prepared;
  std::unordered_map<std::int64_t, std::size_t> by_id;
  auto prepare = [&](const DomainSample& s) {
    Prepared p;
    p.sample = &s;
    p.context = local_context(s.cloud, cfg.knn);
    if (align) {
      p.guided = guided_features(s);
      if (p.guided.features.cols != embed && !s.views.empty()) {
        throw DataError("ShapeMismatch", "feature channels differ from embedding width");
      }
      if (s.views.empty()) p.guided.features = EmbeddingMatrix(s.cloud.size(), embed);
    }
    if (mixing) p.instance_keys = point_instance_keys(s);
    if (!by_id.emplace(s.sample_id, prepared.size()).second) {
      throw DataError("DuplicateSampleId", std::to_string(s.sample_id));
    }
    prepared.push_back(std::move(p));
  };
  prepared.reserve(source.size() + target.size());
  for (const auto& s : source) prepare(s);
  const std::size_t target_base = prepared.size();
  if (use_target)
    for (const auto& s : target) prepare(s);

  auto plain_item = [&](const Prepared& p, bool labelled) {
    Item it;
    it.cloud = &p.sample->cloud;
    it.rows = pick_rows(it.cloud->size(), cfg.points_per_cloud, rng);
    it.context = EmbeddingMatrix(it.rows.size(), kContextWidth);
    if (align) {
      it.guided = EmbeddingMatrix(it.rows.size(), embed);
      it.covered.assign(it.rows.size(), 0);
    }
    for (std::size_t r = 0; r < it.rows.size(); ++r) {
      const std::size_t i = it.rows[r];
      auto ctx = p.context.row(i);
      std::copy(ctx.begin(), ctx.end(), it.context.row(r).begin());
      if (align && p.guided.covered[i]) {
        it.covered[r] = 1;
        auto g = p.guided.features.row(i);
        std::copy(g.begin(), g.end(), it.guided.row(r).begin());
      }
    }
    it.labelled = labelled;
    return it;
  };

  const int batch = cfg.batch_size;
  const int steps = static_cast<int>((source.size() + batch - 1) / batch);
  const int normal = use_target ? 2 * batch : batch;
  const int mixed = mixing ? mixed_count(normal, cfg.mixed_proportion) : 0;
  const bool keep_normal = !(mixing && cfg.mixed_proportion >= 1.0);

  std::vector<std::size_t> src_order(source.size()), tgt_order(use_target ? target.size() : 0);
  std::size_t src_pos = 0, tgt_cursor = 0;

  TrainResult result;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(src_order.begin(), src_order.end(), 0);
    std::iota(tgt_order.begin(), tgt_order.end(), 0);
    std::shuffle(src_order.begin(), src_order.end(), rng.engine());
    std::shuffle(tgt_order.begin(), tgt_order.end(), rng.engine());
    src_pos = 0;
    tgt_cursor = 0;
    double seg_sum = 0.0, align_sum = 0.0;
    int seg_steps = 0, align_steps = 0;

    for (int step = 0; step < steps; ++step) {
      std::vector<Item> items;
      if (keep_normal) {
        for (int k = 0; k < batch; ++k) {
          items.push_back(plain_item(prepared[src_order[src_pos++ % src_order.size()]], true));
        }
        if (use_target) {
          for (int k = 0; k < batch; ++k) {
            const auto& p = prepared[target_base + tgt_order[tgt_cursor++ % tgt_order.size()]];
            items.push_back(plain_item(p, cfg.target_labels));
          }
        }
      }
      for (int k = 0; k < mixed; ++k) {
        const auto si = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(source.size()) - 1));
        const auto ti = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(target.size()) - 1));
        const Prepared* a = &prepared[si];
        const Prepared* b = &prepared[target_base + ti];
        if (rng.bernoulli(0.5)) std::swap(a, b);
        Rng child = rng.split();
        MixedCloud m = hybrid_mix(*a->sample, *b->sample, *mix, child, a->instance_keys);
        Item it;
        it.owned = std::move(m.cloud);
        if (!cfg.target_labels && it.owned.labels) {
          // target points must not leak ground truth into mixed clouds
          for (std::size_t i = 0; i < m.provenance.size(); ++i) {
            if (m.provenance[i].sample_id == b->sample->sample_id ? b->sample->domain == Domain::Target
                                                                   : a->sample->domain == Domain::Target) {
              (*it.owned.labels)[i] = kIgnore;
            }
          }
        }
        it.rows = pick_rows(it.owned.size(), cfg.points_per_cloud, rng);
        it.context = local_context(it.owned, cfg.knn, it.rows);
        if (align) {
          it.guided = EmbeddingMatrix(it.rows.size(), embed);
          it.covered.assign(it.rows.size(), 0);
          for (std::size_t r = 0; r < it.rows.size(); ++r) {
            const Provenance& pv = m.provenance[it.rows[r]];
            const Prepared& src = prepared[by_id.at(pv.sample_id)];
            if (!src.guided.covered[pv.index]) continue;
            it.covered[r] = 1;
            auto row = src.guided.features.row(pv.index);
            std::copy(row.begin(), row.end(), it.guided.row(r).begin());
          }
        }
        items.push_back(std::move(it));
      }
      for (auto& it : items)
        if (!it.cloud) it.cloud = &it.owned;

      Batch b = assemble(items, embed, align, cfg.augment, rng);
      ForwardPass pass = forward(model, b.inputs);

      EmbeddingMatrix grad_logits, grad_embed;
      if (std::any_of(b.labels.begin(), b.labels.end(), [](int l) { return l != kIgnore; })) {
        SegLossResult seg = seg_loss(pass.logits, b.labels);
        seg_sum += seg.loss;
        ++seg_steps;
        grad_logits = std::move(seg.grad);
      }
      if (align) {
        AlignmentResult al = align_loss(pass.embed, b.guided, b.covered);
        if (al.num_covered > 0) {
          align_sum += al.loss;
          ++align_steps;
          for (double& g : al.grad.data) g *= cfg.lambda;
          grad_embed = std::move(al.grad);
        }
      }
      Model grads = backward(model, b.inputs, pass, grad_logits, grad_embed);
      opt.step(model, grads);
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.seg_loss = seg_steps ? seg_sum / seg_steps : 0.0;
    entry.align_loss = align_steps ? align_sum / align_steps : 0.0;
    if (eval && !eval->empty()) entry.target_miou = evaluate(model, *eval, cfg.knn).miou();
    result.log.push_back(entry);
  }
  result.model = std::move(model);
  return result;
}

ConfusionMatrix evaluate(const Model& model, const std::vector<DomainSample>& samples, int knn) {
  ConfusionMatrix cm(model.head.classes);
  for (const auto& s : samples) {
    if (!s.cloud.labels) continue;
    auto out = forward(model, s.cloud, knn);
    cm.accumulate(*s.cloud.labels, predict(out.logits));
  }
  return cm;
}

double guided_similarity(const Model& model, const std::vector<DomainSample>& samples, int knn) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& s : samples) {
    GuidedFeatures g = guided_features(s);
    auto out = forward(model, s.cloud, knn);
    const auto n = static_cast<std::size_t>(std::count(g.covered.begin(), g.covered.end(), 1));
    if (n == 0 || g.features.cols != out.embed.cols) continue;
    total += mean_cosine(out.embed, g.features, g.covered) * static_cast<double>(n);
    count += n;
  }
  return count ? total / static_cast<double>(count) : 0.0;
}

std::vector<int> threshold_predictions(const EmbeddingMatrix& logits, double threshold) {
  std::vector<int> out(logits.rows, kIgnore);
  for (std::size_t i = 0; i < logits.rows; ++i) {
    auto z = logits.row(i);
    const auto best = static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - z[best]);
    const double p_max = 1.0 / sum;
    if (p_max >= threshold) out[i] = static_cast<int>(best);
  }
  return out;
}

PseudoLabelResult pseudo_labels(const Model& model, const std::vector<DomainSample>& target, double threshold,
                                int knn) {
  PseudoLabelResult r;
  std::size_t kept = 0, total = 0;
  for (const auto& s : target) {
    DomainSample copy = s;
    auto out = forward(model, s.cloud, knn);
    copy.cloud.labels = threshold_predictions(out.logits, threshold);
    for (int l : *copy.cloud.labels) kept += l != kIgnore;
    total += copy.cloud.size();
    r.samples.push_back(std::move(copy));
  }
  r.kept_fraction = total ? static_cast<double>(kept) / static_cast<double>(total) : 0.0;
  return r;
}

std::vector<DomainSample> strip_labels(std::vector<DomainSample> samples) {
  for (auto& s : samples) s.cloud.labels.reset();
  return samples;
}

}  // namespace pcda
