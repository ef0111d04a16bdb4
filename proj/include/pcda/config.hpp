#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pcda/mixup.hpp"
#include "pcda/synth.hpp"
#include "pcda/train.hpp"

namespace pcda {

/// Every tunable of a run. Text form is `key = value` per line, `#`
/// comments; unknown keys are an error.
struct RunConfig {
  TrainConfig train;
  MixConfig mix;
  synth::DomainParams source = synth::source_defaults();
  synth::DomainParams target = synth::target_defaults();
  int scenes = 40;
  int val_scenes = 12;
  std::uint64_t data_seed = 7;
  int seeds = 5;
  bool pseudo_restart = false;  // pseudo-label retraining from a fresh model instead of fine-tuning
  std::string source_manifest;  // empty: <in>/source.txt
  std::string target_manifest;  // empty: <in>/target.txt
  std::string eval_manifest;    // empty: <in>/target_val.txt

  std::vector<std::string> violations() const;
};

struct ConfigKey {
  std::string name;
  std::string help;
};

/// All accepted keys with their descriptions, in documentation order.
const std::vector<ConfigKey>& config_keys();

/// Applies `key = value` text on top of `base`. Throws DataError with kinds
/// UnknownKey, ParseError(line), InvalidConfig.
RunConfig parse_run_config(const std::string& text, RunConfig base = {});
RunConfig read_run_config(const std::filesystem::path& path);

/// Canonical text of every key (round-trips through parse_run_config).
std::string format_run_config(const RunConfig& cfg);

/// Current value of one key rendered as text (for --help defaults).
std::string config_value(const RunConfig& cfg, const std::string& key);

}  // namespace pcda
