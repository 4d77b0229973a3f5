#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "sebcomm/kmeans.hpp"
#include "sebcomm/rng.hpp"

using namespace sebcomm;

namespace {

Eigen::MatrixXd random_points(int m, int d, uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd pts(m, d);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < d; ++c) pts(r, c) = rng.uniform() * 2.0 - 1.0;
  return pts;
}

void BM_KMeans(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const int K = static_cast<int>(state.range(1));
  Eigen::MatrixXd pts = random_points(m, 32, 5);
  for (auto _ : state) benchmark::DoNotOptimize(kmeans(pts, K, 7));
}
BENCHMARK(BM_KMeans)->Args({64, 4})->Args({256, 10})->Args({1024, 40});

void BM_KMeansWarm(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const int K = static_cast<int>(state.range(1));
  Eigen::MatrixXd pts = random_points(m, 32, 5);
  KMeansResult cold = kmeans(pts, K, 7);
  KMeansOptions opts;
  opts.warm_start = &cold.centers;
  opts.max_iter = 10;
  for (auto _ : state) benchmark::DoNotOptimize(kmeans(pts, K, 7, opts));
}
BENCHMARK(BM_KMeansWarm)->Args({256, 10})->Args({1024, 40});

}  // namespace

BENCHMARK_MAIN();
