#include "pcda/config.hpp"

#include <charconv>
#include <functional>
#include <set>
#include <sstream>

#include "pcda/dataio.hpp"

namespace pcda {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
bool parse_number(const std::string& s, T& out) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end;
}

bool parse_bool(const std::string& s, bool& out) {
  if (s == "true" || s == "1") return out = true, true;
  if (s == "false" || s == "0") return out = false, true;
  return false;
}

std::string fmt(double v) {
  char buf[40];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(std::uint64_t v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }
std::string fmt(const std::string& v) { return v; }

struct Field {
  ConfigKey key;
  std::function<bool(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class T>
bool assign(T& dst, const std::string& text) {
  if constexpr (std::is_same_v<T, bool>) {
    return parse_bool(text, dst);
  } else if constexpr (std::is_same_v<T, std::string>) {
    dst = text;
    return true;
  } else {
    return parse_number(text, dst);
  }
}

template <class Acc>
Field field(std::string name, std::string help, Acc acc) {
  return Field{{std::move(name), std::move(help)},
               [acc](RunConfig& c, const std::string& v) { return assign(acc(c), v); },
               [acc](const RunConfig& c) { return fmt(acc(const_cast<RunConfig&>(c))); }};
}

void add_domain_fields(std::vector<Field>& out, const std::string& prefix,
                       synth::DomainParams RunConfig::*member) {
  auto f = [&](const char* key, const char* help, auto proj) {
    out.push_back(field(prefix + "." + key, help, [member, proj](RunConfig& c) -> auto& { return proj(c.*member); }));
  };
  using P = synth::DomainParams;
  f("beams", "vertical rays", [](P& p) -> auto& { return p.beams; });
  f("azimuth_steps", "horizontal rays", [](P& p) -> auto& { return p.azimuth_steps; });
  f("pitch_min", "lowest beam pitch, radians", [](P& p) -> auto& { return p.pitch_min; });
  f("pitch_max", "highest beam pitch, radians", [](P& p) -> auto& { return p.pitch_max; });
  f("objects_min", "fewest objects per scene", [](P& p) -> auto& { return p.objects_min; });
  f("objects_max", "most objects per scene", [](P& p) -> auto& { return p.objects_max; });
  f("object_scale", "object size multiplier", [](P& p) -> auto& { return p.object_scale; });
  f("coord_noise", "point noise sigma, meters", [](P& p) -> auto& { return p.coord_noise; });
  f("feature_noise", "feature-map noise sigma", [](P& p) -> auto& { return p.feature_noise; });
  f("num_classes", "semantic classes", [](P& p) -> auto& { return p.num_classes; });
  f("class_seed", "class-embedding seed", [](P& p) -> auto& { return p.class_seed; });
  f("domain_seed", "domain seed", [](P& p) -> auto& { return p.domain_seed; });
  f("sensor_height", "sensor height above ground, meters", [](P& p) -> auto& { return p.sensor_height; });
  f("intensity_gain", "intensity response multiplier", [](P& p) -> auto& { return p.intensity_gain; });
  f("intensity_offset", "intensity response offset", [](P& p) -> auto& { return p.intensity_offset; });
  f("intensity_noise", "intensity noise sigma", [](P& p) -> auto& { return p.intensity_noise; });
  f("image_size", "camera image width and height, pixels", [](P& p) -> auto& { return p.image_size; });
  f("channels", "feature-map channels", [](P& p) -> auto& { return p.channels; });
  f("fov", "camera field of view, radians", [](P& p) -> auto& { return p.fov; });
  f("max_range", "ray length, meters", [](P& p) -> auto& { return p.max_range; });
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> t;
    using C = RunConfig;
    t.push_back(field("batch_size", "source (and target) clouds per step", [](C& c) -> auto& { return c.train.batch_size; }));
    t.push_back(field("lambda", "alignment loss weight", [](C& c) -> auto& { return c.train.lambda; }));
    t.push_back(field("epochs", "training epochs", [](C& c) -> auto& { return c.train.epochs; }));
    t.push_back(field("mixed_proportion", "share of mixed clouds per step, in [0,1]",
                      [](C& c) -> auto& { return c.train.mixed_proportion; }));
    t.push_back(field("pseudo_threshold", "softmax confidence needed to keep a pseudo-label",
                      [](C& c) -> auto& { return c.train.pseudo_threshold; }));
    t.push_back(field("pseudo_epochs", "epochs of pseudo-label retraining",
                      [](C& c) -> auto& { return c.train.pseudo_epochs; }));
    t.push_back(field("seed", "training seed", [](C& c) -> auto& { return c.train.seed; }));
    t.push_back(field("lr", "AdamW learning rate", [](C& c) -> auto& { return c.train.adamw.learning_rate; }));
    t.push_back(field("beta1", "AdamW first-moment decay", [](C& c) -> auto& { return c.train.adamw.beta1; }));
    t.push_back(field("beta2", "AdamW second-moment decay", [](C& c) -> auto& { return c.train.adamw.beta2; }));
    t.push_back(field("adam_eps", "AdamW epsilon", [](C& c) -> auto& { return c.train.adamw.eps; }));
    t.push_back(field("weight_decay", "AdamW decoupled weight decay",
                      [](C& c) -> auto& { return c.train.adamw.weight_decay; }));
    t.push_back(field("hidden", "encoder hidden width", [](C& c) -> auto& { return c.train.hidden; }));
    t.push_back(field("knn", "neighbors for the local context", [](C& c) -> auto& { return c.train.knn; }));
    t.push_back(field("points_per_cloud", "points drawn from each cloud per step (0: all)",
                      [](C& c) -> auto& { return c.train.points_per_cloud; }));
    t.push_back(field("num_classes", "classes of the segmentation head", [](C& c) -> auto& { return c.train.num_classes; }));
    t.push_back(field("augment", "flip/scale/rotate training clouds", [](C& c) -> auto& { return c.train.augment; }));
    t.push_back(field("use_target", "feed target clouds (false: source-only)",
                      [](C& c) -> auto& { return c.train.use_target; }));
    t.push_back(field("target_labels", "train on labels carried by target samples",
                      [](C& c) -> auto& { return c.train.target_labels; }));
    t.push_back(field("mix.polar", "hybrid weight of polar mix", [](C& c) -> auto& { return c.mix.weights[0]; }));
    t.push_back(field("mix.range", "hybrid weight of range mix", [](C& c) -> auto& { return c.mix.weights[1]; }));
    t.push_back(field("mix.laser", "hybrid weight of laser mix", [](C& c) -> auto& { return c.mix.weights[2]; }));
    t.push_back(field("mix.instance", "hybrid weight of instance mix", [](C& c) -> auto& { return c.mix.weights[3]; }));
    t.push_back(field("mix.instance_min", "fewest pasted instances", [](C& c) -> auto& { return c.mix.instance_min; }));
    t.push_back(field("mix.instance_max", "most pasted instances", [](C& c) -> auto& { return c.mix.instance_max; }));
    t.push_back(field("mix.seed", "seed of standalone mixes", [](C& c) -> auto& { return c.mix.seed; }));
    add_domain_fields(t, "source", &RunConfig::source);
    add_domain_fields(t, "target", &RunConfig::target);
    t.push_back(field("scenes", "scenes per domain", [](C& c) -> auto& { return c.scenes; }));
    t.push_back(field("val_scenes", "held-out labelled target scenes", [](C& c) -> auto& { return c.val_scenes; }));
    t.push_back(field("data_seed", "seed of the synthetic domain pair", [](C& c) -> auto& { return c.data_seed; }));
    t.push_back(field("seeds", "training seeds of an ablation", [](C& c) -> auto& { return c.seeds; }));
    t.push_back(field("pseudo_restart", "retrain on pseudo-labels from scratch (false: fine-tune)",
                      [](C& c) -> auto& { return c.pseudo_restart; }));
    t.push_back(field("source_manifest", "source manifest path (empty: <in>/source.txt)",
                      [](C& c) -> auto& { return c.source_manifest; }));
    t.push_back(field("target_manifest", "target manifest path (empty: <in>/target.txt)",
                      [](C& c) -> auto& { return c.target_manifest; }));
    t.push_back(field("eval_manifest", "labelled target manifest path (empty: <in>/target_val.txt)",
                      [](C& c) -> auto& { return c.eval_manifest; }));
    return t;
  }();
  return table;
}

const Field* find_field(const std::string& key) {
  for (const auto& f : fields())
    if (f.key.name == key) return &f;
  return nullptr;
}

}  // namespace

std::vector<std::string> RunConfig::violations() const {
  std::vector<std::string> out = train.violations();
  for (auto& v : mix.violations()) out.push_back(v);
  for (auto& v : source.violations()) out.push_back("source." + v);
  for (auto& v : target.violations()) out.push_back("target." + v);
  if (scenes < 1) out.push_back("scenes >= 1");
  if (val_scenes < 0) out.push_back("val_scenes >= 0");
  if (seeds < 1) out.push_back("seeds >= 1");
  if (source.channels != target.channels) out.push_back("source.channels == target.channels");
  if (source.num_classes != target.num_classes) out.push_back("source.num_classes == target.num_classes");
  if (train.num_classes != source.num_classes) out.push_back("num_classes == source.num_classes");
  return out;
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

RunConfig parse_run_config(const std::string& text, RunConfig cfg) {
  std::istringstream in(text);
  std::string line;
  std::set<std::string> seen;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw DataError("ParseError", "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    const Field* f = find_field(key);
    if (!f) throw DataError("UnknownKey", key);
    if (!seen.insert(key).second) throw DataError("DuplicateKey", key);
    if (!f->set(cfg, value))
      throw DataError("ParseError", "line " + std::to_string(lineno) + ": bad value for " + key + ": " + value);
  }
  if (const auto v = cfg.violations(); !v.empty()) throw DataError("InvalidConfig", v.front());
  return cfg;
}

RunConfig read_run_config(const std::filesystem::path& path) { return parse_run_config(io::read_text(path)); }

std::string format_run_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) out += f.key.name + " = " + f.get(cfg) + "\n";
  return out;
}

std::string config_value(const RunConfig& cfg, const std::string& key) {
  const Field* f = find_field(key);
  if (!f) throw DataError("UnknownKey", key);
  return f->get(cfg);
}

}  // namespace pcda
