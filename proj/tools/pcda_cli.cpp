// pcda: command-line driver for data generation, mixing, training and evaluation.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include "pcda/ablation.hpp"
#include "pcda/config.hpp"
#include "pcda/dataio.hpp"
#include "pcda/encoder.hpp"
#include "pcda/metrics.hpp"
#include "pcda/mixup.hpp"
#include "pcda/projection.hpp"
#include "pcda/synth.hpp"
#include "pcda/train.hpp"

namespace fs = std::filesystem;
using namespace pcda;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Common {
  RunConfig base;
  std::string config;
  std::vector<std::string> sets;

  void attach(CLI::App& app) {
    app.add_option("--config", config, "key = value run configuration (keys listed below)")->check(CLI::ExistingFile);
    app.add_option("--set", sets, "override one config key, KEY=VALUE; repeatable");
  }

  RunConfig load() const {
    RunConfig cfg = config.empty() ? base : parse_run_config(io::read_text(config), base);
    std::string text;
    for (const auto& s : sets) {
      if (s.find('=') == std::string::npos) throw UsageError("--set expects KEY=VALUE, got: " + s);
      text += s + "\n";
    }
    return text.empty() ? cfg : parse_run_config(text, cfg);
  }
};

std::string config_footer(const RunConfig& def) {
  std::string out = "Config keys (default):\n";
  for (const auto& k : config_keys()) {
    out += "  " + k.name + " (" + config_value(def, k.name) + ")  " + k.help + "\n";
  }
  return out;
}

fs::path manifest_path(const std::string& configured, const std::string& in, const char* name) {
  if (!configured.empty()) return configured;
  if (in.empty()) throw UsageError(std::string("--in is required to locate ") + name);
  return fs::path(in) / name;
}

const DomainSample& find_sample(const std::vector<DomainSample>& samples, std::int64_t id) {
  for (const auto& s : samples)
    if (s.sample_id == id) return s;
  throw DataError("UnknownSample", std::to_string(id));
}

// synth -----------------------------------------------------------------

struct SynthCmd {
  Common common;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> scenes, val_scenes;

  void attach(CLI::App& app) {
    common.attach(app);
    app.add_option("--out", out, "output directory for the domain pair")->required();
    app.add_option("--seed", seed, "data seed (default: config data_seed)");
    app.add_option("--scenes", scenes, "scenes per domain (default: config scenes)");
    app.add_option("--val-scenes", val_scenes, "labelled held-out target scenes (default: config val_scenes)");
  }

  void run() const {
    RunConfig cfg = common.load();
    synth::gen_domain_pair(cfg.source, cfg.target, scenes.value_or(cfg.scenes), val_scenes.value_or(cfg.val_scenes),
                           seed.value_or(cfg.data_seed), out);
  }
};

// project ---------------------------------------------------------------

struct ProjectCmd {
  Common common;
  std::string in, out;

  void attach(CLI::App& app) {
    common.attach(app);
    app.add_option("--in", in, "manifest of samples to project")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out, "dump path: `sample_id point visible view u v depth` per point")->required();
  }

  void run() const {
    common.load();
    std::ostringstream os;
    for (const auto& s : io::load_manifest(in)) {
      ViewAssignment va = project_to_views(s.cloud, s.views);
      for (std::size_t i = 0; i < va.size(); ++i) {
        os << fmt("%lld %zu %d %d %.17g %.17g %.17g\n", static_cast<long long>(s.sample_id), i,
                  va.covered(i) ? 1 : 0, va.view[i], va.uv[i].x(), va.uv[i].y(), va.depth[i]);
      }
    }
    io::write_text(out, os.str());
  }
};

// mix -------------------------------------------------------------------

struct MixCmd {
  Common common;
  std::string in, out, strategy = "hybrid", replay_path;
  std::int64_t a = 0;
  std::optional<std::int64_t> b;
  double theta0 = 0.0, r0 = 10.0, phi0 = 0.0;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App& app) {
    common.attach(app);
    app.add_option("--in", in, "manifest holding both samples")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out, "output directory: mixed.pcda, provenance.txt, recipe.txt")->required();
    app.add_option("--a", a, "sample id of a (donor for instance mixes)")->capture_default_str();
    app.add_option("--b", b, "sample id of b (recipient for instance mixes; default: same as --a)");
    app.add_option("--strategy", strategy, "polar | range | laser | instance | hybrid")
        ->capture_default_str()
        ->check(CLI::IsMember({"polar", "range", "laser", "instance", "hybrid"}));
    app.add_option("--theta0", theta0, "polar arc start, radians")->capture_default_str();
    app.add_option("--r0", r0, "range split radius, meters")->capture_default_str();
    app.add_option("--phi0", phi0, "laser split pitch, radians")->capture_default_str();
    app.add_option("--seed", seed, "seed of random choices (default: config mix.seed)");
    app.add_option("--replay", replay_path, "recipe file to re-execute instead of drawing a new mix")
        ->check(CLI::ExistingFile);
  }

  void run() const {
    RunConfig cfg = common.load();
    MixConfig mc = cfg.mix;
    if (seed) mc.seed = *seed;
    const auto samples = io::load_manifest(in);
    MixedCloud m;
    if (!replay_path.empty()) {
      std::string line = io::read_text(replay_path);
      while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
      MixRecipe r = MixRecipe::parse(line);
      m = replay(r, find_sample(samples, r.first_id), find_sample(samples, r.second_id));
    } else {
      const DomainSample& sa = find_sample(samples, a);
      const DomainSample& sb = find_sample(samples, b.value_or(a));
      Rng rng(mc.seed);
      const auto s = parse_strategy(strategy);
      if (!s) {
        m = hybrid_mix(sa, sb, mc, rng);
      } else {
        switch (*s) {
          case MixStrategy::Polar: m = polar_mix(sa, sb, theta0); break;
          case MixStrategy::Range: m = range_mix(sa, sb, r0); break;
          case MixStrategy::Laser: m = laser_mix(sa, sb, phi0); break;
          case MixStrategy::Instance: m = instance_mix(sa, sb, mc, rng); break;
        }
      }
      m.recipe.seed = mc.seed;
    }
    fs::create_directories(out);
    io::write_point_cloud(fs::path(out) / "mixed.pcda", m.cloud);
    std::ostringstream prov;
    for (const auto& p : m.provenance) prov << p.sample_id << ' ' << p.index << '\n';
    io::write_text(fs::path(out) / "provenance.txt", prov.str());
    io::write_text(fs::path(out) / "recipe.txt", m.recipe.serialize() + "\n");
  }
};

// train -----------------------------------------------------------------

struct Data {
  std::vector<DomainSample> source, target, eval;
};

Data load_data(const RunConfig& cfg, const std::string& in, bool need_eval) {
  Data d;
  d.source = io::load_manifest(manifest_path(cfg.source_manifest, in, "source.txt"), cfg.train.num_classes);
  d.target = io::load_manifest(manifest_path(cfg.target_manifest, in, "target.txt"), cfg.train.num_classes);
  if (!cfg.train.target_labels) d.target = strip_labels(std::move(d.target));
  if (need_eval) {
    const fs::path ev = manifest_path(cfg.eval_manifest, in, "target_val.txt");
    if (!cfg.eval_manifest.empty() || fs::exists(ev)) d.eval = io::load_manifest(ev, cfg.train.num_classes);
  }
  return d;
}

struct TrainCmd {
  Common common;
  std::string in, out, setting = "align_hybrid", init;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App& app) {
    common.attach(app);
    app.add_option("--in", in, "data directory with source.txt, target.txt and optionally target_val.txt");
    app.add_option("--out", out, "output directory: model.padm, loss.log")->required();
    app.add_option("--seed", seed, "training seed (default: config seed)");
    app.add_option("--setting", setting,
                   "source_only | align | align_scene | align_instance | align_hybrid | hybrid_pseudo")
        ->capture_default_str();
    app.add_option("--model", init, "checkpoint to fine-tune instead of a fresh model")->check(CLI::ExistingFile);
  }

  void run() const {
    RunConfig cfg = common.load();
    if (seed) cfg.train.seed = *seed;
    const auto s = parse_setting(setting);
    if (!s) throw UsageError("--setting: unknown setting " + setting);
    Data d = load_data(cfg, in, true);
    SettingPlan plan = plan_for(*s, cfg);
    std::optional<Model> start;
    if (!init.empty()) start = read_model(init);
    TrainResult r = train(d.source, d.target, plan.mix, plan.train, &d.eval, start ? &*start : nullptr);
    if (plan.pseudo) {
      TrainResult p = pseudo_stage(r.model, d.source, strip_labels(d.target), cfg, cfg.train.seed, &d.eval);
      for (auto& e : p.log) e.epoch += static_cast<int>(r.log.size());
      r.model = std::move(p.model);
      r.log.insert(r.log.end(), p.log.begin(), p.log.end());
    }
    fs::create_directories(out);
    write_model(fs::path(out) / "model.padm", r.model);
    io::write_text(fs::path(out) / "loss.log", format_log(r.log));
  }
};

// pseudo-label ----------------------------------------------------------

struct PseudoCmd {
  Common common;
  std::string in, out, model;
  std::optional<double> threshold;

  void attach(CLI::App& app) {
    common.attach(app);
    app.add_option("--in", in, "target manifest to relabel")->required()->check(CLI::ExistingFile);
    app.add_option("--model", model, "checkpoint producing the labels")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out, "output directory: target.txt, relabelled clouds, summary.txt")->required();
    app.add_option("--threshold", threshold, "confidence threshold (default: config pseudo_threshold)");
  }

  void run() const {
    RunConfig cfg = common.load();
    const Model m = read_model(model);
    const auto entries = io::read_manifest(in);
    std::vector<DomainSample> target;
    for (const auto& e : entries) target.push_back(io::load_sample(e, m.head.classes));
    PseudoLabelResult r = pseudo_labels(m, strip_labels(std::move(target)), threshold.value_or(cfg.train.pseudo_threshold),
                                        cfg.train.knn);
    const fs::path dir = fs::absolute(out);
    fs::create_directories(dir);
    std::vector<io::ManifestEntry> relabelled;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      io::ManifestEntry e = entries[i];
      auto rel = [&](const std::string& p) { return fs::relative(fs::absolute(e.base_dir / p), dir).generic_string(); };
      for (auto& v : e.views) {
        v.calib = rel(v.calib);
        v.features = rel(v.features);
        if (v.mask) v.mask = rel(*v.mask);
      }
      e.cloud = "p" + std::to_string(e.sample_id) + ".pcda";
      e.base_dir = dir;
      io::write_point_cloud(dir / e.cloud, r.samples[i].cloud);
      relabelled.push_back(std::move(e));
    }
    io::write_manifest(dir / "target.txt", relabelled);
    io::write_text(dir / "summary.txt", fmt("kept_fraction %.6f\n", r.kept_fraction));
  }
};

// eval ------------------------------------------------------------------

struct EvalCmd {
  Common common;
  std::string in, model, predictions, out;

  void attach(CLI::App& app) {
    common.attach(app);
    app.add_option("--in", in, "labelled manifest")->required()->check(CLI::ExistingFile);
    auto* m = app.add_option("--model", model, "checkpoint to evaluate")->check(CLI::ExistingFile);
    auto* p = app.add_option("--predictions", predictions,
                             "text file of predicted class ids, one per point in manifest order")
                  ->check(CLI::ExistingFile);
    m->excludes(p);
    app.add_option("--out", out, "report path (default: stdout)");
  }

  void run() const {
    RunConfig cfg = common.load();
    if (model.empty() == predictions.empty()) throw UsageError("eval needs exactly one of --model, --predictions");
    const int classes = model.empty() ? cfg.train.num_classes : read_model(model).head.classes;
    const auto samples = io::load_manifest(in, classes);
    ConfusionMatrix cm(classes);
    if (!model.empty()) {
      cm = evaluate(read_model(model), samples, cfg.train.knn);
    } else {
      std::istringstream is(io::read_text(predictions));
      for (const auto& s : samples) {
        if (!s.cloud.labels) throw DataError("MissingLabels", "sample " + std::to_string(s.sample_id));
        std::vector<int> pred(s.cloud.size());
        for (int& p : pred)
          if (!(is >> p)) throw DataError("SizeMismatch", "fewer predictions than points");
        cm.accumulate(*s.cloud.labels, pred);
      }
      int extra;
      if (is >> extra) throw DataError("SizeMismatch", "more predictions than points");
    }
    if (out.empty()) std::cout << cm.report();
    else io::write_text(out, cm.report());
  }
};

// ablate ----------------------------------------------------------------

struct AblateCmd {
  Common common;
  std::string out, settings;
  std::optional<int> seeds;
  bool premise = false;

  void attach(CLI::App& app) {
    common.attach(app);
    app.add_option("--out", out, "table path (default: stdout)");
    app.add_option("--seeds", seeds, "training seeds per setting (default: config seeds)");
    app.add_option("--settings", settings, "comma-separated subset of settings (default: all six)");
    app.add_flag("--premise", premise,
                 "also rerun the best setting with per-domain class-embedding seeds and report the drop");
  }

  void run() const {
    RunConfig cfg = common.load();
    if (seeds) cfg.seeds = *seeds;
    std::vector<Setting> list;
    if (settings.empty()) {
      list = all_settings();
    } else {
      std::stringstream ss(settings);
      for (std::string tok; std::getline(ss, tok, ',');) {
        auto s = parse_setting(tok);
        if (!s) throw UsageError("--settings: unknown setting " + tok);
        list.push_back(*s);
      }
    }
    auto log = [](const std::string& line) { std::cerr << line << '\n'; };
    AblationReport rep = run_ablation(cfg, list, log);
    std::string text = rep.table();
    if (premise) {
      const auto best = std::max_element(rep.rows.begin(), rep.rows.end(),
                                         [](const auto& x, const auto& y) { return x.median < y.median; });
      RunConfig alt = cfg;
      alt.target.class_seed = cfg.source.class_seed + 1;
      AblationReport un = run_ablation(alt, {best->setting}, log);
      text += fmt("premise %s shared %.4f unshared %.4f drop %.4f\n", to_string(best->setting), best->median,
                  un.rows.front().median, best->median - un.rows.front().median);
    }
    if (out.empty()) std::cout << text;
    else io::write_text(out, text);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pcda: cross-domain point-cloud adaptation with image-guided features"};
  app.require_subcommand(1);
  SynthCmd synth_cmd;
  ProjectCmd project_cmd;
  MixCmd mix_cmd;
  TrainCmd train_cmd;
  PseudoCmd pseudo_cmd;
  EvalCmd eval_cmd;
  AblateCmd ablate_cmd;
  ablate_cmd.common.base = ablation_defaults();
  std::map<CLI::App*, std::function<void()>> runners;
  auto add = [&](const char* name, const char* desc, auto& cmd) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->footer(config_footer(cmd.common.base));
    cmd.attach(*sub);
    runners[sub] = [&cmd] { cmd.run(); };
  };
  add("synth", "generate a synthetic source/target domain pair", synth_cmd);
  add("project", "dump per-point projections of a manifest", project_cmd);
  add("mix", "mix two samples and write the cloud, provenance and recipe", mix_cmd);
  add("train", "train an encoder and write a checkpoint and loss log", train_cmd);
  add("pseudo-label", "relabel a target manifest with confident predictions", pseudo_cmd);
  add("eval", "write a per-class IoU and mIoU report", eval_cmd);
  add("ablate", "train every setting over several seeds and print a comparison table", ablate_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    for (auto& [sub, run] : runners)
      if (sub->parsed()) run();
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: IoError: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
