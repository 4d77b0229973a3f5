#include <benchmark/benchmark.h>

#include "sebcomm/image.hpp"
#include "sebcomm/metrics.hpp"
#include "sebcomm/rng.hpp"

using namespace sebcomm;

namespace {

Image random_image(int h, int w, uint64_t seed) {
  Image im(h, w);
  Rng rng(seed);
  for (auto& v : im.pixels.data) v = static_cast<float>(rng.uniform());
  return im;
}

void BM_MsSsim(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  Image a = random_image(side, side, 1);
  Image b = random_image(side, side, 2);
  for (auto _ : state) benchmark::DoNotOptimize(ms_ssim(a, b));
}
BENCHMARK(BM_MsSsim)->Arg(64)->Arg(176)->Arg(256);

void BM_Psnr(benchmark::State& state) {
  Image a = random_image(256, 256, 1);
  Image b = random_image(256, 256, 2);
  for (auto _ : state) benchmark::DoNotOptimize(psnr(a, b));
}
BENCHMARK(BM_Psnr);

void BM_Patchify(benchmark::State& state) {
  Image im = random_image(250, 250, 3);
  for (auto _ : state) {
    PatchGrid g = patchify(im, 32, 32);
    benchmark::DoNotOptimize(g);
  }
}
BENCHMARK(BM_Patchify);

}  // namespace

BENCHMARK_MAIN();
