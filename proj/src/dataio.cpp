#include "pcda/dataio.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "bytes.hpp"

namespace pcda::io {

using detail::ByteReader;
using detail::ByteWriter;

namespace {

constexpr std::uint8_t kHasIntensity = 0x1;
constexpr std::uint8_t kHasLabels = 0x2;

void check_payload(const ByteReader& r, std::uint64_t expected_bytes, const char* what) {
  if (r.remaining() != expected_bytes) {
    throw DataError("SizeMismatch", std::string(what) + " declares " + std::to_string(expected_bytes) +
                                        " payload bytes at offset " + std::to_string(r.offset()) +
                                        ", file has " + std::to_string(r.remaining()));
  }
}

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <class T>
bool parse_number(std::string_view tok, T& out) {
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && p == tok.data() + tok.size();
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("IoError", "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("IoError", "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("IoError", "short write to " + path.string());
}

std::string read_text(const fs::path& path) {
  auto bytes = read_bytes(path);
  return {bytes.begin(), bytes.end()};
}

void write_text(const fs::path& path, const std::string& text) {
  write_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

// ---- point cloud ---------------------------------------------------------

std::vector<std::uint8_t> encode_point_cloud(const PointCloud& cloud) {
  ByteWriter w;
  w.magic("PCDA");
  std::uint8_t flags = (cloud.has_intensity() ? kHasIntensity : 0) | (cloud.has_labels() ? kHasLabels : 0);
  w.u8(flags);
  w.u32(static_cast<std::uint32_t>(cloud.size()));
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.positions[i];
    w.f32(static_cast<float>(p.x()));
    w.f32(static_cast<float>(p.y()));
    w.f32(static_cast<float>(p.z()));
    if (cloud.intensity) w.f32(static_cast<float>((*cloud.intensity)[i]));
    if (cloud.labels) w.i32((*cloud.labels)[i]);
  }
  return w.take();
}

PointCloud decode_point_cloud(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  r.expect_magic("PCDA");
  std::uint8_t flags = r.u8();
  std::uint32_t n = r.u32();
  bool has_i = flags & kHasIntensity;
  bool has_l = flags & kHasLabels;
  std::uint64_t record = 12 + (has_i ? 4 : 0) + (has_l ? 4 : 0);
  if (static_cast<std::uint64_t>(n) * record > r.remaining()) {
    throw DataError("TruncatedFile", "declared " + std::to_string(n) + " points but only " +
                                         std::to_string(r.remaining()) + " bytes follow offset " +
                                         std::to_string(r.offset()));
  }
  PointCloud cloud;
  cloud.positions.resize(n);
  if (has_i) cloud.intensity.emplace(n);
  if (has_l) cloud.labels.emplace(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    double x = r.f32(), y = r.f32(), z = r.f32();
    cloud.positions[i] = Vec3(x, y, z);
    if (has_i) (*cloud.intensity)[i] = r.f32();
    if (has_l) (*cloud.labels)[i] = r.i32();
  }
  return cloud;
}

PointCloud read_point_cloud(const fs::path& path) { return decode_point_cloud(read_bytes(path)); }
void write_point_cloud(const fs::path& path, const PointCloud& cloud) {
  write_bytes(path, encode_point_cloud(cloud));
}

// ---- calibration ----------------------------------------------------------

std::string encode_calibration(const CameraCalibration& calib) {
  std::ostringstream os;
  os << "K =";
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) os << ' ' << format_double(calib.intrinsic(r, c));
  os << "\nR =";
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) os << ' ' << format_double(calib.rotation(r, c));
  os << "\nT =";
  for (int i = 0; i < 3; ++i) os << ' ' << format_double(calib.translation(i));
  os << "\nsize = " << calib.width << ' ' << calib.height << '\n';
  return os.str();
}

CameraCalibration decode_calibration(const std::string& text) {
  std::map<std::string, std::vector<std::string>> values;
  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw DataError("ParseError", "line " + std::to_string(lineno) + ": expected `key = values`");
    }
    std::string key(trim(body.substr(0, eq)));
    if (key != "K" && key != "R" && key != "T" && key != "size") {
      throw DataError("ParseError", "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (values.count(key)) throw DataError("DuplicateKey", key);
    auto toks = split_ws(body.substr(eq + 1));
    std::size_t want = key == "T" ? 3 : key == "size" ? 2 : 9;
    if (toks.size() != want) {
      throw DataError("ParseError", "line " + std::to_string(lineno) + ": key " + key + " expects " +
                                        std::to_string(want) + " values");
    }
    for (auto tok : toks) {
      bool ok;
      if (key == "size") {
        int v;
        ok = parse_number(tok, v);
      } else {
        double v;
        ok = parse_number(tok, v) && std::isfinite(v);
      }
      if (!ok) {
        throw DataError("ParseError", "line " + std::to_string(lineno) + ": bad number '" +
                                          std::string(tok) + "'");
      }
    }
    values[key] = std::vector<std::string>(toks.begin(), toks.end());
  }
  for (const char* key : {"K", "R", "T", "size"}) {
    if (!values.count(key)) throw DataError("MissingKey", key);
  }
  CameraCalibration c;
  auto num = [](std::string_view t) {
    double v = 0;
    parse_number(t, v);
    return v;
  };
  for (int i = 0; i < 9; ++i) {
    c.intrinsic(i / 3, i % 3) = num(values["K"][i]);
    c.rotation(i / 3, i % 3) = num(values["R"][i]);
  }
  for (int i = 0; i < 3; ++i) c.translation(i) = num(values["T"][i]);
  parse_number(values["size"][0], c.width);
  parse_number(values["size"][1], c.height);
  auto violations = validate(c);
  if (!violations.empty()) throw DataError("InvariantViolation", violations.front().describe());
  return c;
}

CameraCalibration read_calibration(const fs::path& path) { return decode_calibration(read_text(path)); }
void write_calibration(const fs::path& path, const CameraCalibration& calib) {
  write_text(path, encode_calibration(calib));
}

// ---- feature map ---------------------------------------------------------

std::vector<std::uint8_t> encode_feature_map(const FeatureMap& fm) {
  ByteWriter w;
  w.magic("FMAP");
  w.u32(static_cast<std::uint32_t>(fm.height));
  w.u32(static_cast<std::uint32_t>(fm.width));
  w.u32(static_cast<std::uint32_t>(fm.channels));
  for (float v : fm.data) w.f32(v);
  return w.take();
}

FeatureMap decode_feature_map(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  r.expect_magic("FMAP");
  std::uint32_t h = r.u32(), w = r.u32(), c = r.u32();
  std::uint64_t count = static_cast<std::uint64_t>(h) * w * c;
  check_payload(r, count * 4, "feature map");
  if (h == 0 || w == 0 || c == 0) throw DataError("SizeMismatch", "feature map has a zero dimension");
  FeatureMap fm(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
  for (auto& v : fm.data) v = r.f32();
  return fm;
}

FeatureMap read_feature_map(const fs::path& path) { return decode_feature_map(read_bytes(path)); }
void write_feature_map(const fs::path& path, const FeatureMap& fm) {
  write_bytes(path, encode_feature_map(fm));
}

// ---- mask map ------------------------------------------------------------

std::vector<std::uint8_t> encode_mask_map(const MaskMap& mm) {
  ByteWriter w;
  w.magic("IMSK");
  w.u32(static_cast<std::uint32_t>(mm.height));
  w.u32(static_cast<std::uint32_t>(mm.width));
  for (auto id : mm.ids) w.u16(id);
  return w.take();
}

MaskMap decode_mask_map(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  r.expect_magic("IMSK");
  std::uint32_t h = r.u32(), w = r.u32();
  check_payload(r, static_cast<std::uint64_t>(h) * w * 2, "mask map");
  if (h == 0 || w == 0) throw DataError("SizeMismatch", "mask map has a zero dimension");
  MaskMap mm(static_cast<int>(h), static_cast<int>(w));
  for (auto& id : mm.ids) id = r.u16();
  return mm;
}

MaskMap read_mask_map(const fs::path& path) { return decode_mask_map(read_bytes(path)); }
void write_mask_map(const fs::path& path, const MaskMap& mm) { write_bytes(path, encode_mask_map(mm)); }

// ---- manifest ------------------------------------------------------------

std::vector<ManifestEntry> parse_manifest(const std::string& text, const fs::path& base_dir,
                                          bool check_paths) {
  std::vector<ManifestEntry> out;
  std::set<std::int64_t> ids;
  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) {
    throw DataError("ParseError", "line " + std::to_string(lineno) + ": " + what);
  };
  auto check = [&](const std::string& rel) {
    if (check_paths && !fs::exists(base_dir / rel)) throw DataError("DanglingPath", (base_dir / rel).string());
  };
  while (std::getline(lines, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() < 3 || (toks.size() - 3) % 3 != 0) {
      fail("expected `sample_id domain cloud [calib featmap mask|-]...`");
    }
    ManifestEntry e;
    e.base_dir = base_dir;
    if (!parse_number(toks[0], e.sample_id)) fail("bad sample_id '" + std::string(toks[0]) + "'");
    auto dom = parse_domain(toks[1]);
    if (!dom) fail("bad domain '" + std::string(toks[1]) + "'");
    e.domain = *dom;
    e.cloud = std::string(toks[2]);
    for (std::size_t i = 3; i < toks.size(); i += 3) {
      ViewPaths v{std::string(toks[i]), std::string(toks[i + 1]), std::nullopt};
      if (toks[i + 2] != "-") v.mask = std::string(toks[i + 2]);
      e.views.push_back(std::move(v));
    }
    if (!ids.insert(e.sample_id).second) {
      throw DataError("DuplicateSampleId", std::to_string(e.sample_id) + " at line " + std::to_string(lineno));
    }
    check(e.cloud);
    for (const auto& v : e.views) {
      check(v.calib);
      check(v.features);
      if (v.mask) check(*v.mask);
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  return parse_manifest(read_text(path), path.parent_path(), true);
}

std::string format_manifest(const std::vector<ManifestEntry>& entries) {
  std::ostringstream os;
  for (const auto& e : entries) {
    os << e.sample_id << ' ' << to_string(e.domain) << ' ' << e.cloud;
    for (const auto& v : e.views) os << ' ' << v.calib << ' ' << v.features << ' ' << v.mask.value_or("-");
    os << '\n';
  }
  return os.str();
}

void write_manifest(const fs::path& path, const std::vector<ManifestEntry>& entries) {
  write_text(path, format_manifest(entries));
}

DomainSample load_sample(const ManifestEntry& entry, int num_classes) {
  DomainSample s;
  s.sample_id = entry.sample_id;
  s.domain = entry.domain;
  s.cloud = read_point_cloud(entry.base_dir / entry.cloud);
  for (const auto& v : entry.views) {
    CameraView view;
    view.calib = read_calibration(entry.base_dir / v.calib);
    view.features = read_feature_map(entry.base_dir / v.features);
    if (v.mask) view.mask = read_mask_map(entry.base_dir / *v.mask);
    s.views.push_back(std::move(view));
  }
  require_valid(s, num_classes);
  return s;
}

std::vector<DomainSample> load_manifest(const fs::path& path, int num_classes) {
  std::vector<DomainSample> out;
  for (const auto& e : read_manifest(path)) out.push_back(load_sample(e, num_classes));
  return out;
}

ManifestEntry save_sample(const fs::path& dir, const std::string& stem, const DomainSample& sample) {
  fs::create_directories(dir);
  ManifestEntry e;
  e.sample_id = sample.sample_id;
  e.domain = sample.domain;
  e.base_dir = dir;
  e.cloud = stem + ".pcda";
  write_point_cloud(dir / e.cloud, sample.cloud);
  for (std::size_t v = 0; v < sample.views.size(); ++v) {
    const auto& view = sample.views[v];
    std::string vs = stem + "_v" + std::to_string(v);
    ViewPaths p{vs + ".calib", vs + ".fmap", std::nullopt};
    write_calibration(dir / p.calib, view.calib);
    write_feature_map(dir / p.features, view.features);
    if (view.mask) {
      p.mask = vs + ".imsk";
      write_mask_map(dir / *p.mask, *view.mask);
    }
    e.views.push_back(std::move(p));
  }
  return e;
}

}  // namespace pcda::io
