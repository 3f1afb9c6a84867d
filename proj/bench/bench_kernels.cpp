// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <vector>

#include "strokelab/denoiser.hpp"
#include "strokelab/metrics.hpp"
#include "strokelab/raster.hpp"

using namespace strokelab;

namespace {

BezierStroke bench_stroke(int side) {
  Rng rng(1);
  return generate_random_stroke(rng, ParamRanges::reference().scaled_to(side));
}

void BM_DistanceFieldSerial(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const BezierStroke s = bench_stroke(side);
  for (auto _ : state) benchmark::DoNotOptimize(distance_field_serial(s, side, side));
}

void BM_DistanceFieldOmp(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const BezierStroke s = bench_stroke(side);
  for (auto _ : state) benchmark::DoNotOptimize(distance_field_omp(s, side, side));
}

std::pair<Image, Image> image_pair(int side) {
  Rng rng(2);
  Image a(side, side, 3), b(side, side, 3);
  for (auto& v : a.data) v = rng.uniform();
  for (auto& v : b.data) v = rng.uniform();
  return {a, b};
}

void BM_MseSerial(benchmark::State& state) {
  const auto [a, b] = image_pair(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mse_serial(a, b));
}

void BM_MseOmp(benchmark::State& state) {
  const auto [a, b] = image_pair(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mse_omp(a, b));
}

struct BatchFixture {
  Denoiser model;
  std::vector<DenoiserExample> batch;
  std::vector<double> grad;

  explicit BatchFixture(int batch_size) : model(make_model()) {
    Rng rng(3);
    for (int i = 0; i < batch_size; ++i)
      batch.push_back({rng.normal_vector(256), static_cast<int>(rng.index(64)), rng.normal_vector(256), {}});
    grad.resize(model.param_count());
  }
  static Denoiser make_model() {
    Rng rng(4);
    return Denoiser(DenoiserArch{}, rng);
  }
};

void BM_DenoiserBatchSerial(benchmark::State& state) {
  BatchFixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(batch_loss_gradient_serial(f.model, f.batch, f.grad));
}

void BM_DenoiserBatchOmp(benchmark::State& state) {
  BatchFixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(batch_loss_gradient_omp(f.model, f.batch, f.grad));
}

}  // namespace

BENCHMARK(BM_DistanceFieldSerial)->Arg(32)->Arg(128)->Arg(512);
BENCHMARK(BM_DistanceFieldOmp)->Arg(32)->Arg(128)->Arg(512);
BENCHMARK(BM_MseSerial)->Arg(64)->Arg(512)->Arg(2048);
BENCHMARK(BM_MseOmp)->Arg(64)->Arg(512)->Arg(2048);
BENCHMARK(BM_DenoiserBatchSerial)->Arg(32)->Arg(128);
BENCHMARK(BM_DenoiserBatchOmp)->Arg(32)->Arg(128);

BENCHMARK_MAIN();
