#include <benchmark/benchmark.h>

#include <cmath>

#include "vbunmix/model.hpp"
#include "vbunmix/special_functions.hpp"
#include "vbunmix/synthetic.hpp"
#include "vbunmix/vb_engine.hpp"

namespace {

using namespace vbunmix;

void BM_hazard_ratio(benchmark::State& state) {
  double z = -30.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hazard_ratio(z));
    z += 0.001;
    if (z > 30.0) z = -30.0;
  }
}
BENCHMARK(BM_hazard_ratio);

void BM_truncated_normal_moments(benchmark::State& state) {
  double mu = -8.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(truncated_normal_moments(mu, 1.3));
    mu += 0.001;
    if (mu > 8.0) mu = -8.0;
  }
}
BENCHMARK(BM_truncated_normal_moments);

void BM_sweep_cuprite_shape(benchmark::State& state) {
  const auto inst = generate_instance(188, 14, 3, 30.0, 0.9, 99);
  PosteriorState s = init_state(inst.y, inst.phi, {});
  for (auto _ : state) {
    sweep(s, inst.y, inst.phi, {});
    benchmark::DoNotOptimize(s.mean_beta);
  }
}
BENCHMARK(BM_sweep_cuprite_shape);

void BM_run_pixel(benchmark::State& state) {
  const auto inst = generate_instance(188, 14, 3, 30.0, 0.9, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run(inst.y, inst.phi, {}));
  }
}
BENCHMARK(BM_run_pixel)->Unit(benchmark::kMillisecond);

void BM_nnls(benchmark::State& state) {
  const auto inst = generate_instance(188, 14, 3, 30.0, 0.9, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nnls_baseline(inst.y, inst.phi));
  }
}
BENCHMARK(BM_nnls)->Unit(benchmark::kMicrosecond);

void BM_unmix_image_block(benchmark::State& state) {
  const auto inst = generate_instance(188, 14, 3, 30.0, 0.9, 5);
  const std::size_t pixels = 64;
  std::vector<double> data(pixels * 188);
  for (std::size_t p = 0; p < pixels; ++p) {
    for (std::size_t k = 0; k < 188; ++k) {
      data[p * 188 + k] = inst.y[k] * (1.0 + 0.001 * double(p));
    }
  }
  const PixelBlock block{data.data(), pixels, 188};
  const unsigned threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(unmix_image(block, inst.phi, {}, {}, threads));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * pixels));
}
BENCHMARK(BM_unmix_image_block)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
