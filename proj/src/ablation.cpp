#include "pcda/ablation.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

namespace pcda {

namespace {

constexpr std::pair<Setting, const char*> kNames[] = {
    {Setting::SourceOnly, "source_only"},       {Setting::Align, "align"},
    {Setting::AlignScene, "align_scene"},       {Setting::AlignInstance, "align_instance"},
    {Setting::AlignHybrid, "align_hybrid"},     {Setting::HybridPseudo, "hybrid_pseudo"},
};

}  // namespace

const char* to_string(Setting s) noexcept {
  for (auto [k, name] : kNames)
    if (k == s) return name;
  return "?";
}

std::optional<Setting> parse_setting(std::string_view s) noexcept {
  for (auto [k, name] : kNames)
    if (s == name) return k;
  return std::nullopt;
}

const std::vector<Setting>& all_settings() {
  static const std::vector<Setting> v{Setting::SourceOnly,    Setting::Align,       Setting::AlignScene,
                                      Setting::AlignInstance, Setting::AlignHybrid, Setting::HybridPseudo};
  return v;
}

SettingPlan plan_for(Setting s, const RunConfig& cfg) {
  SettingPlan p;
  p.train = cfg.train;
  MixConfig mix = cfg.mix;
  switch (s) {
    case Setting::SourceOnly:
      p.train.use_target = false;
      p.train.lambda = 0.0;
      break;
    case Setting::Align:
      break;
    case Setting::AlignScene:
      mix.weights[3] = 0.0;
      p.mix = mix;
      break;
    case Setting::AlignInstance:
      mix.weights = {0.0, 0.0, 0.0, 1.0};
      p.mix = mix;
      break;
    case Setting::AlignHybrid:
      p.mix = mix;
      break;
    case Setting::HybridPseudo:
      p.mix = mix;
      p.pseudo = true;
      break;
  }
  return p;
}

TrainResult pseudo_stage(const Model& model, const std::vector<DomainSample>& source,
                         const std::vector<DomainSample>& target, const RunConfig& cfg, std::uint64_t seed,
                         const std::vector<DomainSample>* eval) {
  PseudoLabelResult pl = pseudo_labels(model, target, cfg.train.pseudo_threshold, cfg.train.knn);
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  tc.target_labels = true;
  tc.epochs = cfg.pseudo_restart ? cfg.train.epochs : cfg.train.pseudo_epochs;
  return train(source, pl.samples, cfg.mix, tc, eval, cfg.pseudo_restart ? nullptr : &model);
}

RunConfig ablation_defaults() {
  RunConfig cfg;
  cfg.train.lambda = 5.0;
  cfg.train.epochs = 60;
  cfg.train.adamw.learning_rate = 0.01;
  cfg.train.points_per_cloud = 256;
  cfg.train.pseudo_epochs = 10;
  return cfg;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

const AblationRow& AblationReport::row(Setting s) const {
  for (const auto& r : rows)
    if (r.setting == s) return r;
  throw DataError("InvalidArgument", std::string("setting not in report: ") + to_string(s));
}

std::string AblationReport::table() const {
  std::string out = "setting        ";
  char buf[64];
  for (auto s : seeds) {
    std::snprintf(buf, sizeof buf, " seed%-4llu", static_cast<unsigned long long>(s));
    out += buf;
  }
  out += "  median\n";
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-15s", to_string(r.setting));
    out += buf;
    for (double m : r.miou) {
      std::snprintf(buf, sizeof buf, " %8.4f", m);
      out += buf;
    }
    std::snprintf(buf, sizeof buf, "  %.4f\n", r.median);
    out += buf;
  }
  return out;
}

namespace {

double score(const Model& m, const synth::DomainPair& data, const RunConfig& cfg) {
  return evaluate(m, data.target_val, cfg.train.knn).miou();
}

}  // namespace

double setting_miou(Setting s, const RunConfig& cfg, const synth::DomainPair& data, std::uint64_t seed) {
  SettingPlan plan = plan_for(s, cfg);
  plan.train.seed = seed;
  const auto target = strip_labels(data.target);
  TrainResult r = train(data.source, target, plan.mix, plan.train);
  if (plan.pseudo) r = pseudo_stage(r.model, data.source, target, cfg, seed);
  return score(r.model, data, cfg);
}

AblationReport run_ablation(const RunConfig& cfg, const std::vector<Setting>& settings,
                            const synth::DomainPair& data, const Progress& progress) {
  if (auto v = cfg.violations(); !v.empty()) throw DataError("InvalidConfig", v.front());
  if (data.target_val.empty()) throw DataError("InvalidArgument", "ablation needs labelled target scenes");
  AblationReport rep;
  for (int i = 0; i < cfg.seeds; ++i) rep.seeds.push_back(cfg.train.seed + static_cast<std::uint64_t>(i));
  for (Setting s : settings) rep.rows.push_back({s, {}, 0.0});

  const auto target = strip_labels(data.target);
  for (std::uint64_t seed : rep.seeds) {
    std::map<Setting, Model> models;
    for (auto& row : rep.rows) {
      SettingPlan plan = plan_for(row.setting, cfg);
      plan.train.seed = seed;
      Model model;
      if (plan.pseudo) {
        // reuse the hybrid model of this seed when it was trained already
        auto it = models.find(Setting::AlignHybrid);
        Model base = it != models.end()
                         ? it->second
                         : train(data.source, target, plan.mix, plan.train).model;
        model = pseudo_stage(base, data.source, target, cfg, seed).model;
      } else {
        model = train(data.source, target, plan.mix, plan.train).model;
      }
      row.miou.push_back(score(model, data, cfg));
      if (progress) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "seed %llu %s miou %.4f", static_cast<unsigned long long>(seed),
                      to_string(row.setting), row.miou.back());
        progress(buf);
      }
      models.emplace(row.setting, std::move(model));
    }
  }
  for (auto& row : rep.rows) row.median = median(row.miou);
  return rep;
}

AblationReport run_ablation(const RunConfig& cfg, const std::vector<Setting>& settings, const Progress& progress) {
  const auto data = synth::make_domain_pair(cfg.source, cfg.target, cfg.scenes, cfg.val_scenes, cfg.data_seed);
  return run_ablation(cfg, settings, data, progress);
}

}  // namespace pcda
