#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pcda/core.hpp"
#include "pcda/dataio.hpp"

namespace pcda::synth {

/// Class ids of the synthetic world.
enum SceneClass : int { kGround = 0, kCar = 1, kBuilding = 2, kPole = 3, kVegetation = 4, kPerson = 5 };
inline constexpr int kNumSceneClasses = 6;

/// Sensor and scene statistics of one synthetic domain.
struct DomainParams {
  int beams = 64;
  int azimuth_steps = 180;
  double pitch_min = -0.42;  // radians
  double pitch_max = 0.05;
  int objects_min = 10;
  int objects_max = 18;
  double object_scale = 1.0;
  double coord_noise = 0.02;    // meters
  double feature_noise = 0.05;  // per channel
  int num_classes = kNumSceneClasses;
  std::uint64_t class_seed = 2024;  // shared across domains for a unified feature space
  std::uint64_t domain_seed = 1;
  double sensor_height = 1.73;
  double intensity_gain = 1.0;  // intensity = reflectivity * gain + offset + noise, clamped to [0, 1]
  double intensity_offset = 0.0;
  double intensity_noise = 0.03;
  int image_size = 96;
  int channels = 16;
  double fov = 1.5707963267948966;  // horizontal and vertical, radians
  double max_range = 40.0;

  std::vector<std::string> violations() const;
};

/// Default source domain: 64-beam-like sensor.
DomainParams source_defaults();
/// Default target domain: 32-beam-like sensor, lower mount, noisier, with
/// larger objects and a different intensity response.
DomainParams target_defaults();

/// Unit-norm class embeddings (num_classes + 1 rows; the last is sky),
/// determined by `class_seed` and `channels` only.
std::vector<std::vector<double>> class_embeddings(const DomainParams& params);

struct SceneObject {
  enum class Shape { Box, Cylinder } shape = Shape::Box;
  int cls = kCar;
  Vec3 lo = Vec3::Zero(), hi = Vec3::Zero();  // box bounds
  Vec2 center = Vec2::Zero();                 // cylinder axis
  double radius = 0.0, z_lo = 0.0, z_hi = 0.0;
};

struct Scene {
  double ground_z = -1.73;
  std::vector<SceneObject> objects;
};

struct Hit {
  double t = 0.0;
  int cls = -1;       // -1: no hit
  int instance = 0;   // object index + 1; 0 for ground
};

/// First hit along origin + t * dir, t in (0, max_range].
Hit cast_ray(const Scene& scene, const Vec3& origin, const Vec3& dir, double max_range);

Scene make_scene(const DomainParams& params, std::uint64_t scene_seed);

/// The single forward-facing camera used for every synthetic scene.
CameraCalibration camera_for(const DomainParams& params);

/// One labelled scene: ray-cast cloud plus one camera view with rendered
/// class-embedding features and instance masks.
DomainSample gen_scene(const DomainParams& params, std::uint64_t scene_seed, std::int64_t sample_id = 0,
                       Domain domain = Domain::Source);

struct DomainPair {
  std::vector<DomainSample> source;
  std::vector<DomainSample> target;
  std::vector<DomainSample> target_val;
};

DomainPair make_domain_pair(const DomainParams& src, const DomainParams& tgt, int scenes_per_domain,
                            int val_scenes, std::uint64_t seed);

/// Writes every sample under `out_dir` plus manifests source.txt,
/// target.txt and (when val_scenes > 0) target_val.txt.
void gen_domain_pair(const DomainParams& src, const DomainParams& tgt, int scenes_per_domain, int val_scenes,
                     std::uint64_t seed, const std::filesystem::path& out_dir);

}  // namespace pcda::synth
