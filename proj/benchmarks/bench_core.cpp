#include <benchmark/benchmark.h>

#include <random>

#include "strokeseg/fcm.hpp"
#include "strokeseg/growcut.hpp"
#include "strokeseg/histogram.hpp"
#include "strokeseg/morphology.hpp"
#include "strokeseg/otsu.hpp"
#include "strokeseg/phantom.hpp"
#include "strokeseg/pipeline.hpp"
#include "strokeseg/registration.hpp"

using namespace strokeseg;

namespace {

const Phantom& phantom() {
  static const Phantom ph = make_phantom(phantom_series(1, 1, false)[0]);
  return ph;
}

void BM_Otsu(benchmark::State& state) {
  const auto h = histogram(phantom().dwi, 256, HistogramDomain::kBrainOnly);
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(multilevel_otsu(h, n));
}
BENCHMARK(BM_Otsu)->Arg(1)->Arg(5)->Arg(10)->Arg(19);

void BM_Fcm(benchmark::State& state) {
  FcmOptions o;
  o.clusters = static_cast<int>(state.range(0));
  o.per_pixel = state.range(1) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(fcm_fit(phantom().dwi, o));
}
BENCHMARK(BM_Fcm)->Args({4, 0})->Args({28, 0})->Args({4, 1})->Args({28, 1})->Unit(benchmark::kMillisecond);

void BM_Growcut(benchmark::State& state) {
  const auto cfg = preset_config("table2-otsu-gc");
  const auto base = base_segment(phantom().dwi, cfg, {cfg.params.ints, std::nullopt});
  const auto seeds = make_seeds(base, phantom().dwi);
  for (auto _ : state) benchmark::DoNotOptimize(growcut_run(phantom().dwi, seeds));
}
BENCHMARK(BM_Growcut)->Unit(benchmark::kMillisecond);

void BM_Erode(benchmark::State& state) {
  const BallElement ball(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(erode(phantom().brain, ball));
}
BENCHMARK(BM_Erode)->Arg(3)->Arg(9)->Arg(21)->Arg(41);

void BM_Register(benchmark::State& state) {
  const auto& fixed = phantom().dwi;
  const auto moving = warp_linear(fixed, AffineTransform2D::translation(5, 3).inverse(), fixed.width(), fixed.height());
  RegistrationOptions o;
  o.family = static_cast<TransformFamily>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(register_images(fixed, moving, o));
}
BENCHMARK(BM_Register)
    ->Arg(static_cast<int>(TransformFamily::kTranslation))
    ->Arg(static_cast<int>(TransformFamily::kAffine))
    ->Unit(benchmark::kMillisecond);

void BM_SegmentPreset(benchmark::State& state) {
  const auto cfg = preset_config(presets()[static_cast<std::size_t>(state.range(0))].name);
  state.SetLabel(std::string(presets()[static_cast<std::size_t>(state.range(0))].name));
  for (auto _ : state) benchmark::DoNotOptimize(segment(phantom().dwi, cfg));
}
BENCHMARK(BM_SegmentPreset)->DenseRange(0, 4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
