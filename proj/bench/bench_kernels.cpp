// Serial reference kernels against their OpenMP counterparts. Set
// OMP_NUM_THREADS to vary the parallel side.

#include <benchmark/benchmark.h>

#include "pcda/encoder.hpp"
#include "pcda/metrics.hpp"
#include "pcda/projection.hpp"
#include "pcda/reference.hpp"
#include "support.hpp"

using namespace pcda;

namespace {

PointCloud cloud_of(std::size_t n) {
  Rng rng(1);
  return test::random_cloud(rng, n, true, true, 6, 20.0);
}

template <bool Parallel>
void BM_ProjectPoints(benchmark::State& st) {
  Rng rng(2);
  const auto calib = test::random_calibration(rng);
  const auto cloud = cloud_of(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) {
    if constexpr (Parallel) benchmark::DoNotOptimize(project_points(cloud, calib));
    else benchmark::DoNotOptimize(reference::project_points(cloud, calib));
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void BM_SampleFeatures(benchmark::State& st) {
  Rng rng(3);
  const auto fm = test::random_feature_map(rng, 96, 96, 16);
  std::vector<Vec2> uv(static_cast<std::size_t>(st.range(0)));
  for (auto& q : uv) q = Vec2(rng.uniform(0, 95), rng.uniform(0, 95));
  for (auto _ : st) {
    if constexpr (Parallel) benchmark::DoNotOptimize(sample_features(fm, uv));
    else benchmark::DoNotOptimize(reference::sample_features(fm, uv));
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void BM_LocalContext(benchmark::State& st) {
  const auto cloud = cloud_of(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) {
    if constexpr (Parallel) benchmark::DoNotOptimize(local_context(cloud, 8));
    else benchmark::DoNotOptimize(reference::local_context(cloud, 8));
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void BM_Forward(benchmark::State& st) {
  Rng rng(4);
  const Model m = init_model(32, 16, 6, rng);
  const auto x = test::random_matrix(rng, static_cast<std::size_t>(st.range(0)), kInputWidth);
  for (auto _ : st) {
    if constexpr (Parallel) benchmark::DoNotOptimize(forward(m, x));
    else benchmark::DoNotOptimize(reference::forward(m, x));
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Fast>
void BM_Confusion(benchmark::State& st) {
  Rng rng(5);
  std::vector<int> l(static_cast<std::size_t>(st.range(0))), p(l.size());
  for (std::size_t i = 0; i < l.size(); ++i) {
    l[i] = static_cast<int>(rng.uniform_int(0, 9));
    p[i] = static_cast<int>(rng.uniform_int(0, 9));
  }
  for (auto _ : st) {
    if constexpr (Fast) {
      ConfusionMatrix cm(10);
      cm.accumulate(l, p);
      benchmark::DoNotOptimize(cm);
    } else {
      benchmark::DoNotOptimize(reference::confusion(10, l, p));
    }
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

}  // namespace

BENCHMARK(BM_ProjectPoints<false>)->Name("project_points/serial")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_ProjectPoints<true>)->Name("project_points/omp")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_SampleFeatures<false>)->Name("sample_features/serial")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_SampleFeatures<true>)->Name("sample_features/omp")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_LocalContext<false>)->Name("local_context/serial")->Arg(1 << 10)->Arg(1 << 12);
BENCHMARK(BM_LocalContext<true>)->Name("local_context/omp")->Arg(1 << 10)->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_Forward<false>)->Name("forward/serial")->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_Forward<true>)->Name("forward/omp")->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_Confusion<false>)->Name("confusion/serial")->Arg(1 << 16);
BENCHMARK(BM_Confusion<true>)->Name("confusion/counting")->Arg(1 << 16);

BENCHMARK_MAIN();
