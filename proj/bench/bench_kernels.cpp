// Serial references against the production kernels.

#include <benchmark/benchmark.h>

#include "hilltail/distributions.hpp"
#include "hilltail/hill.hpp"
#include "hilltail/montecarlo.hpp"
#include "hilltail/selection.hpp"

using namespace hilltail;

static void BM_HillTrace(benchmark::State& state) {
  const auto s = sample(frechet(1.0), static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(hill_trace(s));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_HillTrace)->RangeMultiplier(4)->Range(256, 4096)->Complexity();

static void BM_HillTraceReference(benchmark::State& state) {
  const auto s = sample(frechet(1.0), static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(hill_trace_reference(s));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_HillTraceReference)->RangeMultiplier(4)->Range(256, 4096)->Complexity();

static void BM_Lepski(benchmark::State& state) {
  const auto trace = hill_trace(sample(student(2.0), static_cast<std::size_t>(state.range(0)), 2));
  for (auto _ : state) benchmark::DoNotOptimize(lepski_practical(trace));
}
BENCHMARK(BM_Lepski)->Arg(1000)->Arg(10000);

static void BM_LepskiReference(benchmark::State& state) {
  const auto trace = hill_trace(sample(student(2.0), static_cast<std::size_t>(state.range(0)), 2));
  const double r = practical_threshold(trace.sample_size, 2.1);
  for (auto _ : state) benchmark::DoNotOptimize(lepski_with_threshold_reference(trace, r, 30));
}
BENCHMARK(BM_LepskiReference)->Arg(1000)->Arg(10000);

static void BM_RmseProfile(benchmark::State& state) {
  const auto spec = frechet(1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rmse_profile(spec, 10000, 64, 3, full_grid(10000), static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_RmseProfile)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_RmseProfileSerial(benchmark::State& state) {
  const auto spec = frechet(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(rmse_profile_serial(spec, 10000, 64, 3, full_grid(10000)));
}
BENCHMARK(BM_RmseProfileSerial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
