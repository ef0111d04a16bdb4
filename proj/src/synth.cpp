#include "pcda/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pcda/rng.hpp"

namespace pcda::synth {

namespace {

constexpr double kRayEps = 1e-9;

// Mean reflectivity per class before the domain's intensity gain.
constexpr double kReflectivity[kNumSceneClasses] = {0.15, 0.85, 0.55, 0.70, 0.30, 0.42};

// Camera centre in the sensor frame (slightly ahead of and above the LiDAR).
const Vec3 kCameraCenter(0.10, 0.0, 0.05);

std::uint64_t scene_seed_for(std::uint64_t seed, std::uint64_t domain_seed, std::uint64_t index,
                             std::uint64_t stream) {
  Rng r(seed * 0x100000001b3ULL ^ (domain_seed << 20) ^ (stream << 56));
  for (std::uint64_t i = 0; i <= index % 7; ++i) r.next();
  return r.next() ^ (index * 0x9e3779b97f4a7c15ULL);
}

bool hit_box(const SceneObject& o, const Vec3& org, const Vec3& dir, double& t_hit) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (std::abs(dir[a]) < 1e-15) {
      if (org[a] < o.lo[a] || org[a] > o.hi[a]) return false;
      continue;
    }
    double t1 = (o.lo[a] - org[a]) / dir[a];
    double t2 = (o.hi[a] - org[a]) / dir[a];
    if (t1 > t2) std::swap(t1, t2);
    t_near = std::max(t_near, t1);
    t_far = std::min(t_far, t2);
  }
  if (t_near > t_far || t_near <= kRayEps) return false;
  t_hit = t_near;
  return true;
}

bool hit_cylinder(const SceneObject& o, const Vec3& org, const Vec3& dir, double& t_hit) {
  double best = std::numeric_limits<double>::infinity();
  const double ox = org.x() - o.center.x(), oy = org.y() - o.center.y();
  const double a = dir.x() * dir.x() + dir.y() * dir.y();
  if (a > 1e-15) {
    const double b = 2.0 * (ox * dir.x() + oy * dir.y());
    const double c = ox * ox + oy * oy - o.radius * o.radius;
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double t = (-b - std::sqrt(disc)) / (2.0 * a);
      const double z = org.z() + t * dir.z();
      if (t > kRayEps && z >= o.z_lo && z <= o.z_hi) best = t;
    }
  }
  if (std::abs(dir.z()) > 1e-15) {
    for (double zc : {o.z_hi, o.z_lo}) {
      const double t = (zc - org.z()) / dir.z();
      if (t <= kRayEps || t >= best) continue;
      const double px = ox + t * dir.x(), py = oy + t * dir.y();
      if (px * px + py * py <= o.radius * o.radius) best = t;
    }
  }
  if (!std::isfinite(best)) return false;
  t_hit = best;
  return true;
}

Vec3 unit_dir(double pitch, double az) {
  return Vec3(std::cos(pitch) * std::cos(az), std::cos(pitch) * std::sin(az), std::sin(pitch));
}

}  // namespace

std::vector<std::string> DomainParams::violations() const {
  std::vector<std::string> out;
  if (beams < 2) out.push_back("DomainParams.beams: must be >= 2");
  if (azimuth_steps < 8) out.push_back("DomainParams.azimuth_steps: must be >= 8");
  if (!(pitch_min < pitch_max)) out.push_back("DomainParams.pitch range: min must be below max");
  if (objects_min < 0 || objects_min > objects_max) out.push_back("DomainParams.objects range: invalid");
  if (!(object_scale > 0.0)) out.push_back("DomainParams.object_scale: must be positive");
  if (coord_noise < 0.0 || feature_noise < 0.0) out.push_back("DomainParams.noise: must be non-negative");
  if (num_classes != kNumSceneClasses) out.push_back("DomainParams.num_classes: the synthetic world has 6 classes");
  if (image_size < 2 || channels < 1) out.push_back("DomainParams.image: size >= 2 and channels >= 1");
  if (!(fov > 0.0 && fov < std::numbers::pi)) out.push_back("DomainParams.fov: must be in (0, pi)");
  if (!(sensor_height > 0.0)) out.push_back("DomainParams.sensor_height: must be positive");
  if (!(intensity_noise >= 0.0)) out.push_back("DomainParams.intensity_noise: must be non-negative");
  return out;
}

DomainParams source_defaults() { return DomainParams{}; }

DomainParams target_defaults() {
  DomainParams p;
  p.beams = 32;
  p.pitch_min = -0.45;
  p.pitch_max = 0.12;
  p.object_scale = 1.15;
  p.coord_noise = 0.04;
  p.feature_noise = 0.08;
  p.domain_seed = 2;
  p.sensor_height = 1.50;
  p.intensity_gain = 0.6;
  p.intensity_offset = 0.3;
  return p;
}

std::vector<std::vector<double>> class_embeddings(const DomainParams& params) {
  Rng rng(params.class_seed);
  std::vector<std::vector<double>> out(params.num_classes + 1, std::vector<double>(params.channels));
  for (auto& e : out) {
    double norm = 0.0;
    for (auto& v : e) {
      v = rng.normal();
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (auto& v : e) v /= norm;
  }
  return out;
}

Hit cast_ray(const Scene& scene, const Vec3& origin, const Vec3& dir, double max_range) {
  Hit best;
  best.t = max_range;
  if (dir.z() < 0.0) {
    const double t = (scene.ground_z - origin.z()) / dir.z();
    if (t > kRayEps && t <= best.t) best = {t, kGround, 0};
  }
  for (std::size_t k = 0; k < scene.objects.size(); ++k) {
    const SceneObject& o = scene.objects[k];
    double t;
    bool hit = o.shape == SceneObject::Shape::Box ? hit_box(o, origin, dir, t) : hit_cylinder(o, origin, dir, t);
    if (hit && t <= best.t && (best.cls < 0 || t < best.t)) best = {t, o.cls, static_cast<int>(k) + 1};
  }
  return best;
}

Scene make_scene(const DomainParams& params, std::uint64_t scene_seed) {
  Rng rng(scene_seed);
  Scene scene;
  scene.ground_z = -params.sensor_height;
  const int count = static_cast<int>(rng.uniform_int(params.objects_min, params.objects_max));
  // car, building, pole, vegetation, person
  std::discrete_distribution<int> pick({0.34, 0.14, 0.18, 0.16, 0.18});
  for (int k = 0; k < count; ++k) {
    SceneObject o;
    o.cls = 1 + pick(rng.engine());
    const double jitter = params.object_scale * rng.uniform(0.85, 1.15);
    const double az = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double r = o.cls == kBuilding ? rng.uniform(14.0, 28.0) : rng.uniform(5.0, 24.0);
    const Vec2 c(r * std::cos(az), r * std::sin(az));
    const double g = scene.ground_z;
    auto box = [&](double len, double wid, double height) {
      o.shape = SceneObject::Shape::Box;
      if (rng.bernoulli(0.5)) std::swap(len, wid);
      o.lo = Vec3(c.x() - len / 2, c.y() - wid / 2, g);
      o.hi = Vec3(c.x() + len / 2, c.y() + wid / 2, g + height);
    };
    auto cyl = [&](double radius, double height) {
      o.shape = SceneObject::Shape::Cylinder;
      o.center = c;
      o.radius = radius;
      o.z_lo = g;
      o.z_hi = g + height;
    };
    switch (o.cls) {
      case kCar: box(4.2 * jitter, 1.8 * jitter, 1.5 * jitter); break;
      case kBuilding: box(9.0 * jitter, 1.2 * jitter, 6.0 * jitter); break;
      case kPole: cyl(0.3 * jitter, 5.0 * jitter); break;
      case kVegetation: cyl(0.9 * jitter, 3.0 * jitter); break;
      default: cyl(0.45 * jitter, 1.75 * jitter); break;
    }
    scene.objects.push_back(o);
  }
  return scene;
}

CameraCalibration camera_for(const DomainParams& params) {
  CameraCalibration c;
  const double f = (params.image_size / 2.0) / std::tan(params.fov / 2.0);
  const double centre = (params.image_size - 1) / 2.0;
  c.intrinsic << f, 0.0, centre, 0.0, f, centre, 0.0, 0.0, 1.0;
  // sensor (x fwd, y left, z up) -> camera (x right, y down, z fwd)
  c.rotation << 0.0, -1.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0;
  c.translation = -(c.rotation * kCameraCenter);
  c.width = params.image_size;
  c.height = params.image_size;
  return c;
}

DomainSample gen_scene(const DomainParams& params, std::uint64_t scene_seed, std::int64_t sample_id,
                       Domain domain) {
  auto problems = params.violations();
  if (!problems.empty()) throw DataError("InvalidConfig", problems.front());

  const Scene scene = make_scene(params, scene_seed);
  Rng noise(scene_seed ^ 0x5bd1e995ULL);

  DomainSample s;
  s.sample_id = sample_id;
  s.domain = domain;
  PointCloud& cloud = s.cloud;
  cloud.intensity.emplace();
  cloud.labels.emplace();
  const Vec3 origin = Vec3::Zero();
  for (int b = 0; b < params.beams; ++b) {
    const double pitch = params.pitch_min + (params.pitch_max - params.pitch_min) * b / (params.beams - 1);
    for (int a = 0; a < params.azimuth_steps; ++a) {
      const double az = 2.0 * std::numbers::pi * a / params.azimuth_steps;
      const Vec3 dir = unit_dir(pitch, az);
      Hit hit = cast_ray(scene, origin, dir, params.max_range);
      if (hit.cls < 0) continue;
      Vec3 p = origin + hit.t * dir;
      if (params.coord_noise > 0.0) {
        p += Vec3(noise.normal(0.0, params.coord_noise), noise.normal(0.0, params.coord_noise),
                  noise.normal(0.0, params.coord_noise));
      }
      cloud.positions.push_back(p);
      const double refl = kReflectivity[hit.cls] * params.intensity_gain + params.intensity_offset +
                          noise.normal(0.0, params.intensity_noise);
      cloud.intensity->push_back(std::clamp(refl, 0.0, 1.0));
      cloud.labels->push_back(hit.cls);
    }
  }

  CameraView view;
  view.calib = camera_for(params);
  const int n = params.image_size;
  view.features = FeatureMap(n, n, params.channels);
  view.mask = MaskMap(n, n);
  const auto emb = class_embeddings(params);
  const Mat3 k_inv = view.calib.intrinsic.inverse();
  const Mat3 r_t = view.calib.rotation.transpose();
  for (int row = 0; row < n; ++row) {
    for (int col = 0; col < n; ++col) {
      Vec3 d = r_t * (k_inv * Vec3(col, row, 1.0));
      d.normalize();
      Hit hit = cast_ray(scene, kCameraCenter, d, 1e6);
      const auto& e = hit.cls < 0 ? emb.back() : emb[hit.cls];
      auto px = view.features.at(row, col);
      for (int ch = 0; ch < params.channels; ++ch) {
        const double v = e[ch] + (params.feature_noise > 0.0 ? noise.normal(0.0, params.feature_noise) : 0.0);
        px[ch] = static_cast<float>(v);
      }
      view.mask->at(row, col) = static_cast<std::uint16_t>(hit.cls > 0 ? hit.instance : 0);
    }
  }
  s.views.push_back(std::move(view));
  return s;
}

DomainPair make_domain_pair(const DomainParams& src, const DomainParams& tgt, int scenes_per_domain,
                            int val_scenes, std::uint64_t seed) {
  DomainPair pair;
  for (int i = 0; i < scenes_per_domain; ++i) {
    pair.source.push_back(gen_scene(src, scene_seed_for(seed, src.domain_seed, i, 0), i, Domain::Source));
  }
  for (int i = 0; i < scenes_per_domain; ++i) {
    pair.target.push_back(
        gen_scene(tgt, scene_seed_for(seed, tgt.domain_seed, i, 1), 100000 + i, Domain::Target));
  }
  for (int i = 0; i < val_scenes; ++i) {
    pair.target_val.push_back(
        gen_scene(tgt, scene_seed_for(seed, tgt.domain_seed, i, 2), 200000 + i, Domain::Target));
  }
  return pair;
}

void gen_domain_pair(const DomainParams& src, const DomainParams& tgt, int scenes_per_domain, int val_scenes,
                     std::uint64_t seed, const std::filesystem::path& out_dir) {
  DomainPair pair = make_domain_pair(src, tgt, scenes_per_domain, val_scenes, seed);
  std::filesystem::create_directories(out_dir);
  auto save_all = [&](const std::vector<DomainSample>& samples, const std::string& sub, const std::string& manifest) {
    std::vector<io::ManifestEntry> entries;
    for (const auto& s : samples) {
      io::ManifestEntry e = io::save_sample(out_dir / sub, "s" + std::to_string(s.sample_id), s);
      e.cloud = sub + "/" + e.cloud;
      for (auto& v : e.views) {
        v.calib = sub + "/" + v.calib;
        v.features = sub + "/" + v.features;
        if (v.mask) v.mask = sub + "/" + *v.mask;
      }
      e.base_dir = out_dir;
      entries.push_back(std::move(e));
    }
    io::write_manifest(out_dir / manifest, entries);
  };
  save_all(pair.source, "source", "source.txt");
  save_all(pair.target, "target", "target.txt");
  if (val_scenes > 0) save_all(pair.target_val, "target_val", "target_val.txt");
}

}  // namespace pcda::synth
