#include <benchmark/benchmark.h>

#include "sebcomm/layers.hpp"
#include "sebcomm/rng.hpp"
#include "sebcomm/transforms.hpp"

using namespace sebcomm;

namespace {

Tensor random_input(std::vector<int> shape, uint64_t seed) {
  Tensor t(std::move(shape));
  Rng rng(seed);
  for (auto& v : t.data) v = static_cast<float>(rng.uniform() * 2.0 - 1.0);
  return t;
}

void BM_ConvForward(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  Conv2d conv("c", 3, c, 5, 2, 2, 1);
  Tensor x = random_input({4, 3, 64, 64}, 1);
  for (auto _ : state) benchmark::DoNotOptimize(conv.forward(x));
}
BENCHMARK(BM_ConvForward)->Arg(16)->Arg(64)->Arg(192);

void BM_ConvBackward(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  Conv2d conv("c", 3, c, 5, 2, 2, 1);
  Tensor x = random_input({4, 3, 64, 64}, 1);
  Tensor y = conv.forward(x);
  Tensor gy = random_input(y.shape, 2);
  for (auto _ : state) benchmark::DoNotOptimize(conv.backward(gy));
}
BENCHMARK(BM_ConvBackward)->Arg(16)->Arg(64)->Arg(192);

void BM_GDNForward(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  GDN gdn("g", c, false);
  Tensor x = random_input({4, c, 32, 32}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(gdn.forward(x));
}
BENCHMARK(BM_GDNForward)->Arg(16)->Arg(64)->Arg(192);

void BM_AnalysisStack(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  AnalysisTransform enc("a", 3, c, c, 9);
  Tensor x = random_input({1, 3, 64, 64}, 4);
  for (auto _ : state) benchmark::DoNotOptimize(enc.forward(x));
}
BENCHMARK(BM_AnalysisStack)->Arg(16)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
