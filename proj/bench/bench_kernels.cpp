// Serial reference vs OpenMP kernels. Arguments are square image sizes.
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "detvlm/imagery/degrade.hpp"
#include "detvlm/imagery/overlay.hpp"

using namespace detvlm::imagery;

namespace {

RasterImage grey(int side) { return RasterImage(side, side, {128, 128, 128}); }

std::vector<PixelRect> boxes(int side, int n) {
  std::mt19937 rng(1);
  std::uniform_int_distribution<int> pos(0, side - 2);
  std::vector<PixelRect> out;
  for (int i = 0; i < n; ++i) {
    const int x = pos(rng), y = pos(rng);
    out.push_back({x, y, std::min(side, x + 40), std::min(side, y + 30)});
  }
  return out;
}

void BM_DegradeSerial(benchmark::State& state) {
  const auto img = grey(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(serial::degrade_gaussian(img, {0.0, 50.0, 7}));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void BM_DegradeOpenMP(benchmark::State& state) {
  const auto img = grey(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(degrade_gaussian(img, {0.0, 50.0, 7}));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void BM_OverlaySerial(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto img = grey(side);
  const auto rects = boxes(side, 200);
  const OverlayStyle style;
  for (auto _ : state) benchmark::DoNotOptimize(serial::render_overlays(img, rects, style));
}

void BM_OverlayOpenMP(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto img = grey(side);
  const auto rects = boxes(side, 200);
  const OverlayStyle style;
  for (auto _ : state) benchmark::DoNotOptimize(render_overlays(img, rects, style));
}

}  // namespace

BENCHMARK(BM_DegradeSerial)->Arg(256)->Arg(1024)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DegradeOpenMP)->Arg(256)->Arg(1024)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OverlaySerial)->Arg(256)->Arg(1024)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OverlayOpenMP)->Arg(256)->Arg(1024)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
