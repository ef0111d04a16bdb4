#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcda/core.hpp"
#include "pcda/rng.hpp"

namespace pcda {

enum class MixStrategy { Polar = 0, Range = 1, Laser = 2, Instance = 3 };

const char* to_string(MixStrategy s) noexcept;
std::optional<MixStrategy> parse_strategy(std::string_view s) noexcept;

/// Where an output point came from.
struct Provenance {
  std::int64_t sample_id = 0;
  std::uint32_t index = 0;
  bool operator==(const Provenance&) const = default;
};

/// Everything needed to replay a mix from the same two inputs.
struct MixRecipe {
  MixStrategy strategy = MixStrategy::Polar;
  std::int64_t first_id = 0;   // a (or donor for instance mixes)
  std::int64_t second_id = 0;  // b (or recipient)
  double parameter = 0.0;      // theta0 / r0 / phi0; unused for instance
  std::vector<std::uint32_t> instances;  // chosen instance keys
  std::uint64_t seed = 0;

  /// Single text line, e.g. `strategy=polar a=3 b=7 param=0x1.8p+0 seed=42 instances=-`.
  std::string serialize() const;
  static MixRecipe parse(const std::string& line);
  bool operator==(const MixRecipe&) const = default;
};

struct MixedCloud {
  PointCloud cloud;
  std::vector<Provenance> provenance;
  MixRecipe recipe;
};

struct MixConfig {
  std::array<double, 4> weights{1.0, 1.0, 1.0, 1.0};  // polar, range, laser, instance
  int instance_min = 20;
  int instance_max = 30;
  std::uint64_t seed = 0;

  std::vector<std::string> violations() const;
};

double azimuth(const Vec3& p);
double planar_radius(const Vec3& p);
double pitch(const Vec3& p);

/// True when `angle` lies in the half-open arc [theta0, theta0 + pi) mod 2 pi.
bool in_polar_arc(double angle, double theta0);

/// a-points whose azimuth is in [theta0, theta0 + pi), then b-points in the
/// complementary arc.
MixedCloud polar_mix(const DomainSample& a, const DomainSample& b, double theta0);

/// a-points with planar radius < r0, then b-points with radius >= r0.
MixedCloud range_mix(const DomainSample& a, const DomainSample& b, double r0);

/// a-points with pitch >= phi0, then b-points with pitch < phi0.
MixedCloud laser_mix(const DomainSample& a, const DomainSample& b, double phi0 = 0.0);

/// Recipient's full cloud followed by every donor point whose instance key
/// is among the chosen ones. Throws DataError("NoMasksAvailable") when the
/// donor has no instance-covered point.
/// `donor_keys` may carry point_instance_keys(donor) to skip recomputing it.
MixedCloud instance_mix(const DomainSample& donor, const DomainSample& recipient, const MixConfig& cfg,
                        Rng& rng, std::span<const std::uint32_t> donor_keys = {});

/// Appends donor points with the given instance keys (deterministic core of
/// instance_mix, used for replay).
MixedCloud instance_mix_with(const DomainSample& donor, const DomainSample& recipient,
                             const std::vector<std::uint32_t>& keys,
                             std::span<const std::uint32_t> donor_keys = {});

/// Draws a strategy in proportion to cfg.weights and its parameter; falls
/// back to scene-level strategies when the donor `a` has no masks.
MixedCloud hybrid_mix(const DomainSample& a, const DomainSample& b, const MixConfig& cfg, Rng& rng,
                      std::span<const std::uint32_t> a_keys = {});

/// Re-executes a recipe. `first`/`second` must be the samples named in it.
MixedCloud replay(const MixRecipe& recipe, const DomainSample& first, const DomainSample& second);

/// Flip x with p = 0.5, scale in [0.95, 1.05], rotate about z by [0, 2 pi).
struct AugmentParams {
  bool flip_x = false;
  double scale = 1.0;
  double angle = 0.0;

  /// The linear map applied to each point (and to offset vectors).
  Mat3 matrix() const;
};

AugmentParams draw_augment(Rng& rng);
PointCloud apply_augment(const PointCloud& cloud, const AugmentParams& params);
PointCloud standard_augment(const PointCloud& cloud, Rng& rng);

}  // namespace pcda
