#include <doctest.h>

#include "pcda/projection.hpp"
#include "pcda/reference.hpp"
#include "support.hpp"

using namespace pcda;

namespace {

CameraCalibration identity_calib(int w, int h) {
  CameraCalibration c;
  c.width = w;
  c.height = h;
  return c;
}

PointCloud cloud_of(std::initializer_list<Vec3> pts) {
  PointCloud c;
  c.positions = pts;
  return c;
}

}  // namespace

TEST_CASE("project_points: worked examples") {
  auto p = project_points(cloud_of({Vec3(2, 4, 2)}), identity_calib(4, 4));
  CHECK(p.uv[0].isApprox(Vec2(1, 2)));
  CHECK(p.depth[0] == 2.0);
  CHECK(p.visible[0] == 1);
  CHECK(project_points(cloud_of({Vec3(2, 4, 2)}), identity_calib(2, 2)).visible[0] == 0);

  auto t = identity_calib(4, 4);
  t.translation = Vec3(0, 0, 1);
  p = project_points(cloud_of({Vec3(0, 0, 1)}), t);
  CHECK(p.uv[0] == Vec2(0, 0));
  CHECK(p.depth[0] == 2.0);

  CHECK(project_points(cloud_of({Vec3(0, 0, -1), Vec3(0, 0, 0)}), identity_calib(4, 4)).visible ==
        std::vector<std::uint8_t>{0, 0});

  auto k = identity_calib(101, 101);
  k.intrinsic << 100, 0, 50, 0, 100, 50, 0, 0, 1;
  p = project_points(cloud_of({Vec3(1, 0, 2)}), k);
  CHECK(p.uv[0] == Vec2(100, 50));
  CHECK(p.depth[0] == 2.0);
  CHECK(p.visible[0] == 1);
}

TEST_CASE("project_points matches straight-line evaluation and the serial kernel") {
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    auto c = test::random_calibration(rng);
    auto cloud = test::random_cloud(rng, 64, false, false, 6, 5.0);
    auto p = project_points(cloud, c);
    auto r = reference::project_points(cloud, c);
    CHECK(p.visible == r.visible);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const Vec3& x = cloud.positions[i];
      const auto& R = c.rotation;
      const auto& K = c.intrinsic;
      const double q0 = R(0, 0) * x[0] + R(0, 1) * x[1] + R(0, 2) * x[2] + c.translation[0];
      const double q1 = R(1, 0) * x[0] + R(1, 1) * x[1] + R(1, 2) * x[2] + c.translation[1];
      const double q2 = R(2, 0) * x[0] + R(2, 1) * x[1] + R(2, 2) * x[2] + c.translation[2];
      const double p0 = K(0, 0) * q0 + K(0, 1) * q1 + K(0, 2) * q2;
      const double p1 = K(1, 0) * q0 + K(1, 1) * q1 + K(1, 2) * q2;
      const double p2 = K(2, 0) * q0 + K(2, 1) * q1 + K(2, 2) * q2;
      if (q2 <= kEpsDepth) {
        CHECK(p.visible[i] == 0);
        continue;
      }
      // absolute inside the frame, relative outside where uv is unbounded
      const double tol = p.visible[i] ? 1e-9 : 1e-12 * std::max(1.0, std::abs(p0 / p2) + std::abs(p1 / p2));
      CHECK(std::abs(p.uv[i].x() - p0 / p2) <= tol);
      CHECK(std::abs(p.uv[i].y() - p1 / p2) <= tol);
      CHECK(p.uv[i] == r.uv[i]);
    }
  }
}

TEST_CASE("project_points is invariant to rotating world and extrinsics together") {
  Rng rng(12);
  for (int t = 0; t < 100; ++t) {
    auto c = test::random_calibration(rng);
    auto cloud = test::random_cloud(rng, 32, false, false, 6, 5.0);
    const Mat3 q = test::random_rotation(rng);
    PointCloud turned = cloud;
    for (auto& x : turned.positions) x = q * x;
    CameraCalibration c2 = c;
    c2.rotation = c.rotation * q.transpose();
    auto a = project_points(cloud, c);
    auto b = project_points(turned, c2);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (a.visible[i] && b.visible[i]) CHECK((a.uv[i] - b.uv[i]).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
}

TEST_CASE("project_to_views picks the first visible view") {
  CameraView v0, v1;
  v0.calib = identity_calib(4, 4);
  v1.calib = identity_calib(4, 4);
  v1.calib.translation = Vec3(0, 0, 10);
  std::vector<CameraView> views{v0, v1};
  auto a = project_to_views(cloud_of({Vec3(1, 1, 1), Vec3(0, 0, -5), Vec3(0, 0, -20)}), views);
  CHECK(a.view == std::vector<int>{0, 1, -1});

  Rng rng(13);
  for (int t = 0; t < 50; ++t) {
    std::vector<CameraView> vs(3);
    for (auto& v : vs) v.calib = test::random_calibration(rng);
    auto cloud = test::random_cloud(rng, 200, false, false, 6, 5.0);
    auto got = project_to_views(cloud, vs);
    CHECK(got.view == reference::project_to_views(cloud, vs).view);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      int expect = -1;
      for (int v = 0; v < 3 && expect < 0; ++v)
        if (project_points(cloud_of({cloud.positions[i]}), vs[v].calib).visible[0]) expect = v;
      CHECK(got.view[i] == expect);
    }
  }
}

TEST_CASE("sample_features: nodes, midpoints and the four-tap formula") {
  Rng rng(14);
  auto fm = test::random_feature_map(rng, 5, 6, 3);
  std::vector<Vec2> node{Vec2(2, 3)};
  auto at = sample_features(fm, node);
  for (int ch = 0; ch < 3; ++ch) CHECK(at(0, ch) == fm.at(3, 2)[ch]);

  FeatureMap two(2, 2, 1);
  two.data = {0, 0, 1, 1};
  std::vector<Vec2> mid{Vec2(0.5, 0.5)};
  CHECK(sample_features(two, mid)(0, 0) == 0.5);

  std::vector<Vec2> q{Vec2(0.25, 0.75)};
  const double a = 0.25, b = 0.75;
  auto got = sample_features(fm, q);
  for (int ch = 0; ch < 3; ++ch) {
    const double want = (1 - a) * (1 - b) * fm.at(0, 0)[ch] + a * (1 - b) * fm.at(0, 1)[ch] +
                        (1 - a) * b * fm.at(1, 0)[ch] + a * b * fm.at(1, 1)[ch];
    CHECK(std::abs(got(0, ch) - want) <= 1e-12);
  }

  std::vector<Vec2> corner{Vec2(5, 4)};
  for (int ch = 0; ch < 3; ++ch) CHECK(sample_features(fm, corner)(0, ch) == fm.at(4, 5)[ch]);

  std::vector<Vec2> outside{Vec2(5.01, 0)};
  CHECK_THROWS_AS(sample_features(fm, outside), DataError);
}

TEST_CASE("sample_features equals the serial kernel") {
  Rng rng(15);
  auto fm = test::random_feature_map(rng, 17, 23, 5);
  std::vector<Vec2> uv;
  for (int i = 0; i < 500; ++i) uv.emplace_back(rng.uniform(0, 22), rng.uniform(0, 16));
  CHECK(sample_features(fm, uv).data == reference::sample_features(fm, uv).data);
}

TEST_CASE("point_mask_ids rounds to the nearest pixel") {
  MaskMap mm(3, 3);
  mm.at(0, 2) = 7;
  std::vector<Vec2> uv{Vec2(1.6, 0.2), Vec2(0, 0), Vec2(1.5001, 0.4)};
  CHECK(point_mask_ids(mm, uv) == std::vector<std::uint16_t>{7, 0, 7});
  Rng rng(16);
  auto big = test::random_mask_map(rng, 20, 30, 9);
  std::vector<Vec2> q;
  for (int i = 0; i < 300; ++i) q.emplace_back(rng.uniform(0, 29), rng.uniform(0, 19));
  CHECK(point_mask_ids(big, q) == reference::point_mask_ids(big, q));
}

TEST_CASE("guided features and instance keys on a synthetic sample") {
  auto s = synth::gen_scene(test::tiny_domain(), 5, 0, Domain::Source);
  auto g = guided_features(s);
  auto keys = point_instance_keys(s);
  auto a = project_to_views(s.cloud, s.views);
  REQUIRE(g.covered.size() == s.cloud.size());
  for (std::size_t i = 0; i < s.cloud.size(); ++i) {
    CHECK(static_cast<bool>(g.covered[i]) == a.covered(i));
    if (!a.covered(i)) {
      CHECK(keys[i] == 0);
      for (std::size_t ch = 0; ch < g.features.cols; ++ch) CHECK(g.features(i, ch) == 0.0);
    }
  }
}
