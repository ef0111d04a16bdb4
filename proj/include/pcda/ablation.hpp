#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pcda/config.hpp"
#include "pcda/synth.hpp"
#include "pcda/train.hpp"

namespace pcda {

enum class Setting { SourceOnly, Align, AlignScene, AlignInstance, AlignHybrid, HybridPseudo };

const char* to_string(Setting s) noexcept;
std::optional<Setting> parse_setting(std::string_view s) noexcept;
const std::vector<Setting>& all_settings();

/// Training recipe of one setting: the mix (if any) and train overrides.
struct SettingPlan {
  TrainConfig train;
  std::optional<MixConfig> mix;
  bool pseudo = false;
};
SettingPlan plan_for(Setting s, const RunConfig& cfg);

/// Pseudo-label stage: label the target with `model`, then retrain (fine-tune
/// unless cfg.pseudo_restart) with those labels.
TrainResult pseudo_stage(const Model& model, const std::vector<DomainSample>& source,
                         const std::vector<DomainSample>& target, const RunConfig& cfg, std::uint64_t seed,
                         const std::vector<DomainSample>* eval = nullptr);

struct AblationRow {
  Setting setting;
  std::vector<double> miou;  // one per seed
  double median = 0.0;
};

struct AblationReport {
  std::vector<AblationRow> rows;
  std::vector<std::uint64_t> seeds;

  const AblationRow& row(Setting s) const;
  /// Fixed-width text table, one line per setting plus a header.
  std::string table() const;
};

double median(std::vector<double> v);

using Progress = std::function<void(const std::string&)>;

/// Defaults of the ablation experiment: RunConfig{} with a stronger
/// alignment weight and a longer, faster schedule on point subsets.
RunConfig ablation_defaults();

/// Trains every setting once per training seed cfg.train.seed + i,
/// i < cfg.seeds, on the domain pair drawn from cfg.data_seed, scoring target
/// mIoU on the held-out labelled target scenes.
AblationReport run_ablation(const RunConfig& cfg, const std::vector<Setting>& settings,
                            const synth::DomainPair& data, const Progress& progress = {});
AblationReport run_ablation(const RunConfig& cfg, const std::vector<Setting>& settings = all_settings(),
                            const Progress& progress = {});

/// Target mIoU of one setting for one training seed.
double setting_miou(Setting s, const RunConfig& cfg, const synth::DomainPair& data, std::uint64_t seed);

}  // namespace pcda
