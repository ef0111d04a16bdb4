#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pcda/core.hpp"

namespace pcda::io {

namespace fs = std::filesystem;

// Binary formats are little-endian regardless of host. Readers raise
// DataError with kinds BadMagic, TruncatedFile, SizeMismatch,
// NonFiniteValue; the message carries the byte offset.

/// "PCDA" u8 flags (bit0 intensity, bit1 labels) u32 n, then n records of
/// f32 x y z [f32 intensity] [i32 label].
PointCloud read_point_cloud(const fs::path& path);
void write_point_cloud(const fs::path& path, const PointCloud& cloud);

/// Text `key = values` with keys K, R, T, size.
CameraCalibration read_calibration(const fs::path& path);
void write_calibration(const fs::path& path, const CameraCalibration& calib);

/// "FMAP" u32 h w c, then h*w*c f32 row-major (row, column, channel).
FeatureMap read_feature_map(const fs::path& path);
void write_feature_map(const fs::path& path, const FeatureMap& fm);

/// "IMSK" u32 h w, then h*w u16 ids.
MaskMap read_mask_map(const fs::path& path);
void write_mask_map(const fs::path& path, const MaskMap& mm);

// In-memory variants over raw bytes (used by the file functions).
std::vector<std::uint8_t> encode_point_cloud(const PointCloud& cloud);
PointCloud decode_point_cloud(const std::vector<std::uint8_t>& bytes);
std::string encode_calibration(const CameraCalibration& calib);
CameraCalibration decode_calibration(const std::string& text);
std::vector<std::uint8_t> encode_feature_map(const FeatureMap& fm);
FeatureMap decode_feature_map(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_mask_map(const MaskMap& mm);
MaskMap decode_mask_map(const std::vector<std::uint8_t>& bytes);

struct ViewPaths {
  std::string calib;
  std::string features;
  std::optional<std::string> mask;
  bool operator==(const ViewPaths&) const = default;
};

/// One manifest line. Paths are stored as written (relative to `base_dir`).
struct ManifestEntry {
  std::int64_t sample_id = 0;
  Domain domain = Domain::Source;
  std::string cloud;
  std::vector<ViewPaths> views;
  fs::path base_dir;

  bool operator==(const ManifestEntry& o) const {
    return sample_id == o.sample_id && domain == o.domain && cloud == o.cloud && views == o.views;
  }
};

/// Parses a manifest: `sample_id domain cloud [calib featmap mask|-]...`
/// with `#` comments. Checks that every path exists (DanglingPath) and ids
/// are unique (DuplicateSampleId). Files are not loaded.
std::vector<ManifestEntry> read_manifest(const fs::path& path);
std::vector<ManifestEntry> parse_manifest(const std::string& text, const fs::path& base_dir,
                                          bool check_paths = true);
std::string format_manifest(const std::vector<ManifestEntry>& entries);
void write_manifest(const fs::path& path, const std::vector<ManifestEntry>& entries);

/// Loads every file of an entry and validates the assembled sample.
DomainSample load_sample(const ManifestEntry& entry, int num_classes = -1);
std::vector<DomainSample> load_manifest(const fs::path& path, int num_classes = -1);

/// Writes the sample's files under `dir` with names derived from `stem` and
/// returns the matching entry (paths relative to `dir`).
ManifestEntry save_sample(const fs::path& dir, const std::string& stem, const DomainSample& sample);

std::vector<std::uint8_t> read_bytes(const fs::path& path);
void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes);
std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

}  // namespace pcda::io
