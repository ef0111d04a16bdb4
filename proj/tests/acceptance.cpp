// Acceptance run: one PASS/FAIL line per criterion. Arguments select a subset
// of criteria by number; no arguments runs all ten.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "pcda/ablation.hpp"
#include "pcda/alignment.hpp"
#include "pcda/dataio.hpp"
#include "pcda/metrics.hpp"
#include "pcda/mixup.hpp"
#include "pcda/projection.hpp"
#include "pcda/synth.hpp"
#include "support.hpp"

using namespace pcda;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1 ---------------------------------------------------------------------

Outcome gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(1001);
  double wa = 0, ws = 0, wb = 0;
  const int n = 100;
  for (int t = 0; t < n; ++t) {
    wa = std::max(wa, gradcheck::align(rng));
    ws = std::max(ws, gradcheck::seg(rng));
    wb = std::max(wb, gradcheck::backward(rng));
  }
  const double secs = seconds_since(t0);
  const bool ok = wa < 1e-4 && ws < 1e-4 && wb < 1e-4 && secs < 30.0;
  return {ok, fmt("%d instances each, max rel err align %.2e seg %.2e backward %.2e (< 1e-4), %.2f s (< 30 s)", n, wa,
                  ws, wb, secs)};
}

// 2 ---------------------------------------------------------------------

Outcome alignment_law() {
  Rng rng(1002);
  double lo = 1e300, hi = -1e300, ident = 0, ident_grad = 0, anti = 0, scale = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, 16));
    const auto d = static_cast<std::size_t>(rng.uniform_int(1, 32));
    auto f = test::random_matrix(rng, n, d, rng.uniform(0.01, 100));
    auto g = test::random_matrix(rng, n, d, rng.uniform(0.01, 100));
    std::vector<std::uint8_t> cov(n);
    for (auto& c : cov) c = rng.bernoulli(0.8);
    cov[0] = 1;
    const double l = align_loss(f, g, cov).loss;
    lo = std::min(lo, l);
    hi = std::max(hi, l);

    auto same = align_loss(f, f, cov);
    ident = std::max(ident, std::abs(same.loss));
    for (double v : same.grad.data) ident_grad = std::max(ident_grad, std::abs(v));

    auto neg = f;
    const double k = rng.uniform(0.01, 100);
    for (auto& v : neg.data) v *= -k;
    anti = std::max(anti, std::abs(align_loss(f, neg, cov).loss - 2.0));

    const auto row = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
    std::vector<std::uint8_t> only(n, 0);
    only[row] = 1;
    auto scaled = f;
    const double s = std::exp(rng.uniform(-10, 10));
    for (auto& v : scaled.row(row)) v *= s;
    const double a = align_loss(f, g, only).loss, b = align_loss(scaled, g, only).loss;
    scale = std::max(scale, std::abs(a - b) / std::max(std::abs(a), 1e-300));
  }
  const bool ok = lo >= 0.0 && hi <= 2.0 && ident <= 1e-12 && ident_grad <= 1e-12 && anti <= 1e-12 && scale <= 1e-12;
  return {ok, fmt("1000 batches: loss in [%.3g, %.3g], identical loss %.1e grad %.1e, anti-parallel err %.1e, "
                  "rescale rel err %.1e (tol 1e-12)",
                  lo, hi, ident, ident_grad, anti, scale)};
}

// 3 ---------------------------------------------------------------------

// A random world point at least 0.1 m in front of the camera, drawn around
// the frame so that most land inside it.
Vec3 point_for(Rng& rng, const CameraCalibration& c) {
  const double u = rng.uniform(-0.5 * c.width, 1.5 * c.width);
  const double v = rng.uniform(-0.5 * c.height, 1.5 * c.height);
  const double z = std::exp(rng.uniform(std::log(0.1), std::log(80.0)));
  const Vec3 q = z * (c.intrinsic.inverse() * Vec3(u, v, 1.0));
  return c.rotation.transpose() * (q - c.translation);
}

bool in_frame(double u, double v, const CameraCalibration& c) {
  return u >= 0 && v >= 0 && u <= c.width - 1 && v <= c.height - 1;
}

Outcome projection() {
  Rng rng(1003);
  const int pairs = 10000;
  double worst = 0, worst_eq = 0;
  int visible = 0, flag_mismatch = 0, eq_compared = 0, eq_border = 0;
  for (int t = 0; t < pairs; ++t) {
    const auto c = test::random_calibration(rng);
    PointCloud cloud;
    cloud.positions = {point_for(rng, c)};
    const auto p = project_points(cloud, c);
    double u = 0, v = 0;
    const bool front = oracle::project(cloud.positions[0], c, u, v);
    const bool vis = front && in_frame(u, v, c);
    if (vis != static_cast<bool>(p.visible[0])) {
      // the only admissible disagreement is a point on the frame edge
      const double edge = std::min({std::abs(u), std::abs(v), std::abs(u - (c.width - 1)), std::abs(v - (c.height - 1))});
      if (edge > 1e-9) ++flag_mismatch;
    }
    if (p.visible[0] && front) {
      ++visible;
      worst = std::max({worst, std::abs(p.uv[0].x() - u), std::abs(p.uv[0].y() - v)});
    }

    const Mat3 q = test::random_rotation(rng);
    PointCloud turned;
    turned.positions = {q * cloud.positions[0]};
    CameraCalibration c2 = c;
    c2.rotation = c.rotation * q.transpose();
    const auto r = project_points(turned, c2);
    if (p.visible[0] != r.visible[0]) {
      ++eq_border;
      continue;
    }
    if (p.visible[0]) {
      ++eq_compared;
      worst_eq = std::max(worst_eq, (p.uv[0] - r.uv[0]).cwiseAbs().maxCoeff());
    }
  }
  const bool ok = worst <= 1e-9 && worst_eq <= 1e-9 && flag_mismatch == 0 && visible > pairs / 5 && eq_border <= 2;
  return {ok, fmt("%d pairs, %d in frame: max |uv err| %.2e (tol 1e-9), visibility mismatches %d; equivariance "
                  "max err %.2e over %d (tol 1e-9), %d edge flips",
                  pairs, visible, worst, flag_mismatch, worst_eq, eq_compared, eq_border)};
}

// 4 ---------------------------------------------------------------------

Outcome bilinear() {
  Rng rng(1004);
  double worst = 0, node = 0, bound = 0;
  const int queries = 10000;
  int done = 0;
  while (done < queries) {
    const int h = static_cast<int>(rng.uniform_int(1, 40)), w = static_cast<int>(rng.uniform_int(1, 40));
    const int ch = static_cast<int>(rng.uniform_int(1, 8));
    auto fm = test::random_feature_map(rng, h, w, ch);
    std::vector<Vec2> uv, nodes;
    for (int k = 0; k < 100; ++k) {
      uv.emplace_back(rng.uniform(0, w - 1), rng.uniform(0, h - 1));
      nodes.emplace_back(static_cast<double>(rng.uniform_int(0, w - 1)), static_cast<double>(rng.uniform_int(0, h - 1)));
    }
    auto got = sample_features(fm, uv);
    auto at_nodes = sample_features(fm, nodes);
    for (std::size_t k = 0; k < uv.size(); ++k) {
      const int x0 = std::min(static_cast<int>(std::floor(uv[k].x())), std::max(w - 2, 0));
      const int y0 = std::min(static_cast<int>(std::floor(uv[k].y())), std::max(h - 2, 0));
      const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
      for (int c = 0; c < ch; ++c) {
        worst = std::max(worst, std::abs(got(k, c) - oracle::bilinear(fm, uv[k].x(), uv[k].y(), c)));
        const double vals[4] = {fm.at(y0, x0)[c], fm.at(y0, x1)[c], fm.at(y1, x0)[c], fm.at(y1, x1)[c]};
        const double mn = *std::min_element(vals, vals + 4), mx = *std::max_element(vals, vals + 4);
        bound = std::max({bound, mn - got(k, c), got(k, c) - mx});
        node = std::max(node, std::abs(at_nodes(k, c) - fm.at(static_cast<int>(nodes[k].y()), static_cast<int>(nodes[k].x()))[c]));
      }
    }
    done += static_cast<int>(uv.size());
  }
  const bool ok = worst <= 1e-12 && node == 0.0 && bound <= 1e-12;
  return {ok, fmt("%d queries: max 4-tap err %.2e (tol 1e-12), max node err %.1e, max excursion beyond neighbours %.1e",
                  done, worst, node, bound)};
}

// 5 ---------------------------------------------------------------------

bool is_permutation_of(const PointCloud& out, const PointCloud& in) {
  if (out.size() != in.size()) return false;
  auto rows = [](const PointCloud& c) {
    std::vector<std::tuple<double, double, double, float, int>> r;
    for (std::size_t i = 0; i < c.size(); ++i)
      r.emplace_back(c.positions[i].x(), c.positions[i].y(), c.positions[i].z(), c.intensity ? (*c.intensity)[i] : 0.f,
                     c.labels ? (*c.labels)[i] : 0);
    std::sort(r.begin(), r.end());
    return r;
  };
  return rows(out) == rows(in);
}

bool replays_exactly(const MixedCloud& m, const DomainSample& a, const DomainSample& b) {
  const MixRecipe r = MixRecipe::parse(m.recipe.serialize());
  const MixedCloud again = replay(r, a, b);
  return io::encode_point_cloud(again.cloud) == io::encode_point_cloud(m.cloud) && again.provenance == m.provenance &&
         again.recipe.serialize() == m.recipe.serialize();
}

Outcome mixup() {
  auto p = test::tiny_domain();
  std::vector<DomainSample> pool;
  std::vector<std::vector<std::uint32_t>> keys;
  std::vector<std::size_t> donors;
  for (int s = 0; s < 24; ++s) {
    const Domain d = s % 2 ? Domain::Target : Domain::Source;
    pool.push_back(synth::gen_scene(s % 2 ? synth::target_defaults() : p, 500 + s, s, d));
  }
  for (auto& s : pool) {
    s.cloud.positions.resize(std::min<std::size_t>(s.cloud.size(), 4000));
    s.cloud.labels->resize(s.cloud.positions.size());
    s.cloud.intensity->resize(s.cloud.positions.size());
    keys.push_back(point_instance_keys(s));
    if (std::any_of(keys.back().begin(), keys.back().end(), [](auto k) { return k != 0; })) donors.push_back(keys.size() - 1);
  }
  if (donors.empty()) return {false, "no donor scene with visible instances"};

  Rng rng(1005);
  const int per = 1000;
  int bad_member = 0, bad_twin = 0, bad_size = 0, bad_replay = 0, twins = 0;
  auto pick = [&] { return static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1)); };
  for (int t = 0; t < per; ++t) {
    const auto& a = pool[pick()];
    const auto& b = pool[pick()];
    const double theta = rng.uniform(-4, 4), r0 = rng.uniform(0.5, 40), phi = rng.uniform(-0.5, 0.2);
    for (const MixedCloud& m : {polar_mix(a, b, theta), range_mix(a, b, r0), laser_mix(a, b, phi)}) {
      bad_member += !oracle::verify_mix(m, a, b);
      bad_replay += !replays_exactly(m, a, b);
    }
    for (const MixedCloud& m : {polar_mix(a, a, theta), range_mix(a, a, r0), laser_mix(a, a, phi)}) {
      ++twins;
      bad_twin += !is_permutation_of(m.cloud, a.cloud);
    }

    const std::size_t di = donors[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(donors.size()) - 1))];
    const auto& rec = pool[pick()];
    MixConfig cfg;
    cfg.instance_min = static_cast<int>(rng.uniform_int(1, 4));
    cfg.instance_max = cfg.instance_min + static_cast<int>(rng.uniform_int(0, 4));
    const MixedCloud im = instance_mix(pool[di], rec, cfg, rng, keys[di]);
    bad_member += !oracle::verify_mix(im, pool[di], rec, keys[di]);
    bad_size += im.cloud.size() < rec.cloud.size();
    bad_replay += !replays_exactly(im, pool[di], rec);

    const MixedCloud hm = hybrid_mix(a, b, MixConfig{}, rng);
    bad_member += !oracle::verify_mix(hm, a, b);
    bad_replay += !replays_exactly(hm, a, b);
  }
  const bool ok = bad_member == 0 && bad_twin == 0 && bad_size == 0 && bad_replay == 0;
  return {ok, fmt("%d mixes per strategy (polar, range, laser, instance, hybrid): membership failures %d, "
                  "twin non-permutations %d/%d, undersized instance mixes %d, replay mismatches %d",
                  per, bad_member, bad_twin, twins, bad_size, bad_replay)};
}

// 6 ---------------------------------------------------------------------

Outcome miou() {
  ConfusionMatrix w(2);
  w.add(0, 0, 3);
  w.add(1, 1, 1);
  w.add(1, 0, 1);
  w.add(0, 1, 2);
  const double worked = w.miou();
  Rng rng(1006);
  int mismatches = 0;
  for (int t = 0; t < 1000; ++t) {
    const int classes = static_cast<int>(rng.uniform_int(1, 10));
    const auto n = static_cast<std::size_t>(rng.uniform_int(0, 10000));
    std::vector<int> l(n), p(n);
    const double ignore = rng.uniform(0, 0.3), correct = rng.uniform();
    for (std::size_t i = 0; i < n; ++i) {
      l[i] = rng.bernoulli(ignore) ? kIgnore : static_cast<int>(rng.uniform_int(0, classes - 1));
      p[i] = l[i] != kIgnore && rng.bernoulli(correct) ? l[i] : static_cast<int>(rng.uniform_int(0, classes - 1));
    }
    ConfusionMatrix cm(classes);
    cm.accumulate(l, p);
    mismatches += cm.miou() != oracle::miou(classes, l, p);
  }
  return {mismatches == 0 && worked == 0.375,
          fmt("1000 streams, exact mismatches %d; worked example %.17g (want 0.375)", mismatches, worked)};
}

// 7 ---------------------------------------------------------------------

Outcome round_trips() {
  test::TempDir dir("acceptance_rt");
  Rng rng(1007);
  int bad[5] = {0, 0, 0, 0, 0};
  const int n = 100;
  auto twice = [&](const fs::path& path, auto write, auto read) {
    const auto first = io::read_bytes(path);
    write(dir.path / "again", read(path));
    return first == io::read_bytes(dir.path / "again");
  };
  for (int t = 0; t < n; ++t) {
    const fs::path pc = dir.path / "c.pcda", cal = dir.path / "c.calib", fm = dir.path / "f.feat", mm = dir.path / "m.mask";
    io::write_point_cloud(pc, test::random_cloud(rng, static_cast<std::size_t>(rng.uniform_int(0, 500)), rng.bernoulli(0.5),
                                                 rng.bernoulli(0.5)));
    bad[0] += !twice(pc, io::write_point_cloud, io::read_point_cloud);
    io::write_calibration(cal, test::random_calibration(rng));
    bad[1] += !twice(cal, io::write_calibration, io::read_calibration);
    const int h = static_cast<int>(rng.uniform_int(1, 30)), w = static_cast<int>(rng.uniform_int(1, 30));
    io::write_feature_map(fm, test::random_feature_map(rng, h, w, static_cast<int>(rng.uniform_int(1, 16))));
    bad[2] += !twice(fm, io::write_feature_map, io::read_feature_map);
    io::write_mask_map(mm, test::random_mask_map(rng, h, w, static_cast<int>(rng.uniform_int(1, 65535))));
    bad[3] += !twice(mm, io::write_mask_map, io::read_mask_map);

    std::vector<io::ManifestEntry> entries;
    const int rows = static_cast<int>(rng.uniform_int(0, 6));
    for (int r = 0; r < rows; ++r) {
      io::ManifestEntry e;
      e.sample_id = rng.uniform_int(-1000000, 1000000) * 8 + r;
      e.domain = rng.bernoulli(0.5) ? Domain::Source : Domain::Target;
      e.cloud = "c.pcda";
      const int views = static_cast<int>(rng.uniform_int(0, 3));
      for (int v = 0; v < views; ++v) {
        io::ViewPaths vp{"c.calib", "f.feat", std::nullopt};
        if (rng.bernoulli(0.5)) vp.mask = "m.mask";
        e.views.push_back(vp);
      }
      entries.push_back(e);
    }
    const fs::path man = dir.path / "m.txt";
    io::write_manifest(man, entries);
    const auto parsed = io::read_manifest(man);
    io::write_manifest(dir.path / "m2.txt", parsed);
    bad[4] += !(parsed == entries && io::read_bytes(man) == io::read_bytes(dir.path / "m2.txt"));
  }
  const bool ok = std::all_of(bad, bad + 5, [](int b) { return b == 0; });
  return {ok, fmt("%d instances each, byte mismatches: cloud %d, calibration %d, feature map %d, mask %d, manifest %d", n,
                  bad[0], bad[1], bad[2], bad[3], bad[4])};
}

// 8, 9 ------------------------------------------------------------------

struct AblationRun {
  bool done = false;
  AblationReport report;
  double seconds = 0;
};

AblationRun& ablation() {
  static AblationRun run;
  if (!run.done) {
    const auto t0 = std::chrono::steady_clock::now();
    run.report = run_ablation(ablation_defaults(),
                              {Setting::SourceOnly, Setting::Align, Setting::AlignHybrid, Setting::HybridPseudo});
    run.seconds = seconds_since(t0);
    run.done = true;
    std::fputs(run.report.table().c_str(), stdout);
  }
  return run;
}

int wins(const AblationRow& hi, const AblationRow& lo) {
  int w = 0;
  for (std::size_t i = 0; i < hi.miou.size(); ++i) w += hi.miou[i] > lo.miou[i];
  return w;
}

Outcome ordering() {
  const auto cfg = ablation_defaults();
  auto& run = ablation();
  const auto& src = run.report.row(Setting::SourceOnly);
  const auto& al = run.report.row(Setting::Align);
  const auto& hy = run.report.row(Setting::AlignHybrid);
  const auto& ps = run.report.row(Setting::HybridPseudo);
  const int n = static_cast<int>(src.miou.size());
  const int w1 = wins(al, src), w2 = wins(hy, al);
  const bool ok = n == 5 && cfg.scenes >= 40 && al.median > src.median && hy.median > al.median &&
                  ps.median >= hy.median - 0.01 && w1 >= 4 && w2 >= 4 && run.seconds <= 600.0;
  return {ok, fmt("%d scenes/domain, %d seeds, medians src %.4f < align %.4f (%d/5 seeds) < align+hybrid %.4f (%d/5 "
                  "seeds); hybrid+pseudo %.4f >= %.4f; %.0f s (<= 600 s)",
                  cfg.scenes, n, src.median, al.median, w1, hy.median, w2, ps.median, hy.median - 0.01, run.seconds)};
}

Outcome premise() {
  auto& run = ablation();
  const auto best = *std::max_element(run.report.rows.begin(), run.report.rows.end(),
                                      [](const auto& x, const auto& y) { return x.median < y.median; });
  RunConfig alt = ablation_defaults();
  alt.target.class_seed = alt.source.class_seed + 1;
  const double unshared = run_ablation(alt, {best.setting}).rows.front().median;
  const double drop = best.median - unshared;
  return {drop >= 0.05, fmt("best setting %s: shared %.4f, per-domain embeddings %.4f, drop %.4f (>= 0.05)",
                            to_string(best.setting), best.median, unshared, drop)};
}

// 10 --------------------------------------------------------------------

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PCDA_CLI) + " " + args + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::vector<std::pair<std::string, std::vector<std::uint8_t>>> snapshot(const fs::path& root) {
  std::vector<std::pair<std::string, std::vector<std::uint8_t>>> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out.emplace_back(fs::relative(e.path(), root).generic_string(), io::read_bytes(e.path()));
  std::sort(out.begin(), out.end());
  return out;
}

Outcome determinism() {
  test::TempDir dir("acceptance_cli");
  const std::string small = " --set scenes=3 --set val_scenes=2 --set source.beams=16 --set target.beams=12"
                            " --set source.azimuth_steps=60 --set target.azimuth_steps=60";
  const std::string fast = " --set epochs=2 --set pseudo_epochs=1 --set points_per_cloud=128 --set batch_size=2";
  // each command is run once per copy, in a fresh directory
  std::vector<std::pair<std::string, std::function<std::string(const std::string&)>>> cmds = {
      {"synth", [&](const std::string& d) { return "synth --out " + d + "/data --seed 5" + small; }},
      {"project", [&](const std::string& d) { return "project --in " + d + "/data/source.txt --out " + d + "/proj.txt"; }},
      {"mix", [&](const std::string& d) {
         return "mix --in " + d + "/data/source.txt --out " + d + "/mix --a 0 --b 1 --seed 9";
       }},
      {"mix --replay", [&](const std::string& d) {
         return "mix --in " + d + "/data/source.txt --out " + d + "/replay --replay " + d + "/mix/recipe.txt";
       }},
      {"train", [&](const std::string& d) {
         return "train --in " + d + "/data --out " + d + "/train --seed 3 --setting hybrid_pseudo" + fast;
       }},
      {"pseudo-label", [&](const std::string& d) {
         return "pseudo-label --in " + d + "/data/target.txt --model " + d + "/train/model.padm --out " + d +
                "/pseudo --threshold 0.5";
       }},
      {"eval", [&](const std::string& d) {
         return "eval --in " + d + "/data/target_val.txt --model " + d + "/train/model.padm --out " + d + "/eval.txt";
       }},
      {"ablate", [&](const std::string& d) {
         return "ablate --out " + d + "/ablate.txt --seeds 2 --settings source_only,align_hybrid" + small + fast;
       }},
  };
  const std::string d1 = (dir.path / "one").string(), d2 = (dir.path / "two").string();
  std::vector<std::string> failed;
  for (const auto& [name, make] : cmds) {
    const int c1 = run_cli(make(d1)), c2 = run_cli(make(d2));
    if (c1 != 0 || c2 != 0) failed.push_back(name + fmt(" (exit %d/%d)", c1, c2));
  }
  const auto s1 = snapshot(d1), s2 = snapshot(d2);
  std::vector<std::string> differ;
  for (std::size_t i = 0; i < std::min(s1.size(), s2.size()); ++i)
    if (s1[i] != s2[i]) differ.push_back(s1[i].first);
  const bool ok = failed.empty() && differ.empty() && s1.size() == s2.size() && s1.size() > 10;
  std::string detail = fmt("%zu commands run twice, %zu output files compared", cmds.size(), s1.size());
  for (const auto& f : failed) detail += ", failed: " + f;
  for (const auto& f : differ) detail += ", differs: " + f;
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria = {
      {"gradient suite", gradients},     {"alignment law", alignment_law}, {"projection oracle", projection},
      {"bilinear oracle", bilinear},     {"mix-up conservation", mixup},   {"mIoU oracle", miou},
      {"format round-trips", round_trips}, {"ablation ordering", ordering}, {"unified-space premise", premise},
      {"CLI determinism", determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %2d %-22s %s  %s\n", id, criteria[i].first, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
