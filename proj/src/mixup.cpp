#include "pcda/mixup.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <sstream>

#include "pcda/projection.hpp"

namespace pcda {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

class CloudBuilder {
 public:
  CloudBuilder(const DomainSample& a, const DomainSample& b) {
    with_intensity_ = a.cloud.has_intensity() || b.cloud.has_intensity();
    with_labels_ = a.cloud.has_labels() || b.cloud.has_labels();
    if (with_intensity_) out_.cloud.intensity.emplace();
    if (with_labels_) out_.cloud.labels.emplace();
  }

  void take(const DomainSample& s, std::size_t i) {
    out_.cloud.positions.push_back(s.cloud.positions[i]);
    if (with_intensity_) out_.cloud.intensity->push_back(s.cloud.intensity ? (*s.cloud.intensity)[i] : 0.0);
    if (with_labels_) out_.cloud.labels->push_back(s.cloud.labels ? (*s.cloud.labels)[i] : kIgnore);
    out_.provenance.push_back({s.sample_id, static_cast<std::uint32_t>(i)});
  }

  template <class Pred>
  void take_if(const DomainSample& s, Pred keep) {
    for (std::size_t i = 0; i < s.cloud.size(); ++i)
      if (keep(s.cloud.positions[i])) take(s, i);
  }

  MixedCloud finish(MixRecipe recipe) {
    out_.recipe = std::move(recipe);
    return std::move(out_);
  }

 private:
  MixedCloud out_;
  bool with_intensity_ = false;
  bool with_labels_ = false;
};

std::string hexfloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

}  // namespace

const char* to_string(MixStrategy s) noexcept {
  switch (s) {
    case MixStrategy::Polar: return "polar";
    case MixStrategy::Range: return "range";
    case MixStrategy::Laser: return "laser";
    case MixStrategy::Instance: return "instance";
  }
  return "?";
}

std::optional<MixStrategy> parse_strategy(std::string_view s) noexcept {
  if (s == "polar") return MixStrategy::Polar;
  if (s == "range") return MixStrategy::Range;
  if (s == "laser") return MixStrategy::Laser;
  if (s == "instance") return MixStrategy::Instance;
  return std::nullopt;
}

std::string MixRecipe::serialize() const {
  std::ostringstream os;
  os << "strategy=" << to_string(strategy) << " a=" << first_id << " b=" << second_id
     << " param=" << hexfloat(parameter) << " seed=" << seed << " instances=";
  if (instances.empty()) os << '-';
  for (std::size_t i = 0; i < instances.size(); ++i) os << (i ? "," : "") << instances[i];
  return os.str();
}

MixRecipe MixRecipe::parse(const std::string& line) {
  MixRecipe r;
  std::map<std::string, std::string> kv;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) throw DataError("ParseError", "recipe token '" + tok + "'");
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  for (const char* key : {"strategy", "a", "b", "param", "seed", "instances"}) {
    if (!kv.count(key)) throw DataError("ParseError", std::string("recipe lacks '") + key + "'");
  }
  auto strat = parse_strategy(kv["strategy"]);
  if (!strat) throw DataError("ParseError", "unknown strategy '" + kv["strategy"] + "'");
  r.strategy = *strat;
  try {
    r.first_id = std::stoll(kv["a"]);
    r.second_id = std::stoll(kv["b"]);
    r.parameter = std::strtod(kv["param"].c_str(), nullptr);
    r.seed = std::stoull(kv["seed"]);
    if (kv["instances"] != "-") {
      std::istringstream ids(kv["instances"]);
      std::string id;
      while (std::getline(ids, id, ',')) r.instances.push_back(static_cast<std::uint32_t>(std::stoul(id)));
    }
  } catch (const std::logic_error&) {
    throw DataError("ParseError", "bad number in recipe '" + line + "'");
  }
  return r;
}

std::vector<std::string> MixConfig::violations() const {
  std::vector<std::string> out;
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) out.push_back("MixConfig.weights: must be finite and non-negative");
    sum += w;
  }
  if (!(sum > 0.0)) out.push_back("MixConfig.weights: sum must be positive");
  if (instance_min < 1) out.push_back("MixConfig.instance_min: must be >= 1");
  if (instance_min > instance_max) out.push_back("MixConfig.instance range: lower exceeds upper");
  return out;
}

double azimuth(const Vec3& p) { return std::atan2(p.y(), p.x()); }
double planar_radius(const Vec3& p) { return std::sqrt(p.x() * p.x() + p.y() * p.y()); }
double pitch(const Vec3& p) { return std::atan2(p.z(), planar_radius(p)); }

bool in_polar_arc(double angle, double theta0) {
  double rel = std::fmod(angle - theta0, kTwoPi);
  if (rel < 0.0) rel += kTwoPi;
  if (rel >= kTwoPi) rel -= kTwoPi;
  return rel < std::numbers::pi;
}

MixedCloud polar_mix(const DomainSample& a, const DomainSample& b, double theta0) {
  CloudBuilder out(a, b);
  out.take_if(a, [&](const Vec3& p) { return in_polar_arc(azimuth(p), theta0); });
  out.take_if(b, [&](const Vec3& p) { return !in_polar_arc(azimuth(p), theta0); });
  return out.finish({MixStrategy::Polar, a.sample_id, b.sample_id, theta0, {}, 0});
}

MixedCloud range_mix(const DomainSample& a, const DomainSample& b, double r0) {
  if (!(r0 > 0.0)) throw DataError("InvalidArgument", "range_mix requires r0 > 0");
  CloudBuilder out(a, b);
  out.take_if(a, [&](const Vec3& p) { return planar_radius(p) < r0; });
  out.take_if(b, [&](const Vec3& p) { return planar_radius(p) >= r0; });
  return out.finish({MixStrategy::Range, a.sample_id, b.sample_id, r0, {}, 0});
}

MixedCloud laser_mix(const DomainSample& a, const DomainSample& b, double phi0) {
  CloudBuilder out(a, b);
  out.take_if(a, [&](const Vec3& p) { return pitch(p) >= phi0; });
  out.take_if(b, [&](const Vec3& p) { return pitch(p) < phi0; });
  return out.finish({MixStrategy::Laser, a.sample_id, b.sample_id, phi0, {}, 0});
}

MixedCloud instance_mix_with(const DomainSample& donor, const DomainSample& recipient,
                             const std::vector<std::uint32_t>& keys, std::span<const std::uint32_t> donor_keys) {
  CloudBuilder out(donor, recipient);
  for (std::size_t i = 0; i < recipient.cloud.size(); ++i) out.take(recipient, i);
  if (!keys.empty()) {
    std::vector<std::uint32_t> computed;
    if (donor_keys.empty()) donor_keys = computed = point_instance_keys(donor);
    if (donor_keys.size() != donor.cloud.size()) throw DataError("ShapeMismatch", "donor keys must match the donor cloud");
    const auto& point_keys = donor_keys;
    std::vector<std::uint32_t> sorted = keys;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < donor.cloud.size(); ++i) {
      if (point_keys[i] != 0 && std::binary_search(sorted.begin(), sorted.end(), point_keys[i])) {
        out.take(donor, i);
      }
    }
  }
  return out.finish({MixStrategy::Instance, donor.sample_id, recipient.sample_id, 0.0, keys, 0});
}

namespace {

std::vector<std::uint32_t> available_instances(const DomainSample& donor, std::span<const std::uint32_t> donor_keys) {
  bool any_mask = std::any_of(donor.views.begin(), donor.views.end(),
                              [](const CameraView& v) { return v.mask.has_value(); });
  if (!any_mask) return {};
  std::vector<std::uint32_t> keys = donor_keys.empty() ? point_instance_keys(donor)
                                                       : std::vector<std::uint32_t>(donor_keys.begin(), donor_keys.end());
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  if (!keys.empty() && keys.front() == 0) keys.erase(keys.begin());
  return keys;
}

}  // namespace

MixedCloud instance_mix(const DomainSample& donor, const DomainSample& recipient, const MixConfig& cfg,
                        Rng& rng, std::span<const std::uint32_t> donor_keys) {
  auto available = available_instances(donor, donor_keys);
  if (available.empty()) {
    throw DataError("NoMasksAvailable", "donor sample " + std::to_string(donor.sample_id));
  }
  const std::uint64_t seed = rng.seed();
  const auto k = static_cast<std::size_t>(rng.uniform_int(cfg.instance_min, cfg.instance_max));
  std::vector<std::uint32_t> chosen;
  if (k >= available.size()) {
    chosen = available;
  } else {
    // partial Fisher-Yates: uniform k-subset without replacement
    for (std::size_t i = 0; i < k; ++i) {
      auto j = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(i),
                                                        static_cast<std::int64_t>(available.size() - 1)));
      std::swap(available[i], available[j]);
    }
    chosen.assign(available.begin(), available.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(chosen.begin(), chosen.end());
  }
  MixedCloud out = instance_mix_with(donor, recipient, chosen, donor_keys);
  out.recipe.seed = seed;
  return out;
}

MixedCloud hybrid_mix(const DomainSample& a, const DomainSample& b, const MixConfig& cfg, Rng& rng,
                      std::span<const std::uint32_t> a_keys) {
  auto problems = cfg.violations();
  if (!problems.empty()) throw DataError("InvalidConfig", problems.front());
  const std::uint64_t seed = rng.seed();
  std::array<double, 4> w = cfg.weights;
  if (w[3] > 0.0 && available_instances(a, a_keys).empty()) {
    w[3] = 0.0;
    if (w[0] + w[1] + w[2] <= 0.0) w = {1.0, 1.0, 1.0, 0.0};
  }
  std::discrete_distribution<int> pick(w.begin(), w.end());
  auto strategy = static_cast<MixStrategy>(pick(rng.engine()));
  MixedCloud out;
  switch (strategy) {
    case MixStrategy::Polar:
      out = polar_mix(a, b, rng.uniform(0.0, kTwoPi));
      break;
    case MixStrategy::Range: {
      std::vector<double> radii;
      radii.reserve(a.cloud.size() + b.cloud.size());
      for (const auto& p : a.cloud.positions) radii.push_back(planar_radius(p));
      for (const auto& p : b.cloud.positions) radii.push_back(planar_radius(p));
      double lo = 0.0, hi = 1.0;
      if (!radii.empty()) {
        auto at = [&](std::size_t k) {
          std::nth_element(radii.begin(), radii.begin() + static_cast<std::ptrdiff_t>(k), radii.end());
          return radii[k];
        };
        lo = at((radii.size() - 1) / 4);
        hi = at((3 * (radii.size() - 1)) / 4);
      }
      double r0 = rng.uniform(lo, hi);
      out = range_mix(a, b, std::max(r0, 1e-9));
      break;
    }
    case MixStrategy::Laser:
      out = laser_mix(a, b, 0.0);
      break;
    case MixStrategy::Instance: {
      Rng child = rng.split();
      out = instance_mix(a, b, cfg, child, a_keys);
      break;
    }
  }
  out.recipe.seed = seed;
  return out;
}

MixedCloud replay(const MixRecipe& recipe, const DomainSample& first, const DomainSample& second) {
  if (first.sample_id != recipe.first_id || second.sample_id != recipe.second_id) {
    throw DataError("InvalidArgument", "replay inputs do not match the recipe's sample ids");
  }
  MixedCloud out;
  switch (recipe.strategy) {
    case MixStrategy::Polar: out = polar_mix(first, second, recipe.parameter); break;
    case MixStrategy::Range: out = range_mix(first, second, recipe.parameter); break;
    case MixStrategy::Laser: out = laser_mix(first, second, recipe.parameter); break;
    case MixStrategy::Instance: out = instance_mix_with(first, second, recipe.instances); break;
  }
  out.recipe.seed = recipe.seed;
  return out;
}

Mat3 AugmentParams::matrix() const {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 rot;
  rot << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  Mat3 flip = Mat3::Identity();
  if (flip_x) flip(0, 0) = -1.0;
  return scale * rot * flip;
}

AugmentParams draw_augment(Rng& rng) {
  AugmentParams p;
  p.flip_x = rng.bernoulli(0.5);
  p.scale = rng.uniform(0.95, 1.05);
  p.angle = rng.uniform(0.0, kTwoPi);
  return p;
}

PointCloud apply_augment(const PointCloud& cloud, const AugmentParams& params) {
  PointCloud out = cloud;
  const Mat3 m = params.matrix();
  for (auto& p : out.positions) p = m * p;
  return out;
}

PointCloud standard_augment(const PointCloud& cloud, Rng& rng) {
  return apply_augment(cloud, draw_augment(rng));
}

}  // namespace pcda
