#include <doctest.h>

#include "oracles.hpp"
#include "pcda/metrics.hpp"
#include "pcda/reference.hpp"
#include "support.hpp"

using namespace pcda;

TEST_CASE("confusion tallies") {
  ConfusionMatrix cm(2);
  std::vector<int> ign{kIgnore, kIgnore}, p{0, 1};
  cm.accumulate(ign, p);
  CHECK(cm.total() == 0);
  std::vector<int> l{0, 1}, q{0, 0};
  cm.accumulate(l, q);
  CHECK(cm.at(0, 0) == 1);
  CHECK(cm.at(1, 0) == 1);
  CHECK(cm.at(0, 1) == 0);
  std::vector<int> bad{2};
  std::vector<int> zero{0};
  CHECK_THROWS_AS(cm.accumulate(bad, zero), DataError);
  CHECK_THROWS_AS(cm.accumulate(zero, bad), DataError);
}

TEST_CASE("IoU examples") {
  ConfusionMatrix perfect(2);
  std::vector<int> l{0, 1, 1, 0};
  perfect.accumulate(l, l);
  CHECK(perfect.miou() == 1.0);

  ConfusionMatrix flipped(2);
  std::vector<int> f{1, 0, 0, 1};
  flipped.accumulate(l, f);
  CHECK(flipped.miou() == 0.0);

  // TP (3,1), FP (1,2), FN (2,1)
  ConfusionMatrix w(2);
  w.add(0, 0, 3);
  w.add(1, 1, 1);
  w.add(1, 0, 1);
  w.add(0, 1, 2);
  auto ious = w.iou_per_class();
  CHECK(*ious[0] == 3.0 / 6.0);
  CHECK(*ious[1] == 1.0 / 4.0);
  CHECK(w.miou() == 0.375);

  ConfusionMatrix sparse(4);
  sparse.add(1, 1, 5);
  auto s = sparse.iou_per_class();
  CHECK_FALSE(s[0].has_value());
  CHECK(sparse.miou() == 1.0);
  CHECK(sparse.report() == "0 nan 0\n1 1.000000 5\n2 nan 0\n3 nan 0\nmiou 1.000000\n");
  CHECK(ConfusionMatrix(3).miou() == 0.0);
}

TEST_CASE("random streams match the brute-force count") {
  Rng rng(71);
  for (int t = 0; t < 100; ++t) {
    const int classes = static_cast<int>(rng.uniform_int(1, 10));
    const auto n = static_cast<std::size_t>(rng.uniform_int(0, 2000));
    std::vector<int> l(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      l[i] = rng.bernoulli(0.1) ? kIgnore : static_cast<int>(rng.uniform_int(0, classes - 1));
      p[i] = static_cast<int>(rng.uniform_int(0, classes - 1));
    }
    ConfusionMatrix cm(classes);
    cm.accumulate(l, p);
    CHECK(cm == reference::confusion(classes, l, p));
    CHECK(cm.miou() == oracle::miou(classes, l, p));
  }
}

TEST_CASE("merge adds counts") {
  ConfusionMatrix a(3), b(3);
  a.add(0, 1, 2);
  b.add(0, 1, 3);
  b.add(2, 2);
  a.merge(b);
  CHECK(a.at(0, 1) == 5);
  CHECK(a.support(2) == 1);
  CHECK_THROWS_AS(a.merge(ConfusionMatrix(2)), DataError);
}
