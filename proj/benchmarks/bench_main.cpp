#include <benchmark/benchmark.h>

#include <vector>

#include "chaoslab/analysis.hpp"
#include "chaoslab/forms.hpp"
#include "chaoslab/innovations.hpp"
#include "chaoslab/numerics.hpp"
#include "chaoslab/process.hpp"

namespace {

using namespace chaoslab;

const PowerKernelSpec kBoundary = PowerKernelSpec::product({-0.75, -0.75});

// One path of the separable engine; range(0) = N, range(1) = M.
void BM_EnginePath(benchmark::State& state) {
  const CoefficientField field(kBoundary, state.range(1));
  const SeparablePathEngine engine(field, state.range(0));
  std::vector<double> X(static_cast<std::size_t>(state.range(0)));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    engine.run(InnovationStream(InnovationSpec{Family::gaussian}, seed++), X);
    benchmark::DoNotOptimize(X.data());
  }
  state.counters["work"] = engine.work_estimate();
}
BENCHMARK(BM_EnginePath)->Args({512, 64})->Args({4096, 4096})->Args({4096, 3454144})->Unit(benchmark::kMillisecond);

void BM_BruteForcePath(benchmark::State& state) {
  const CoefficientField field(kBoundary, state.range(1));
  PathConfig cfg;
  cfg.N = state.range(0);
  cfg.M = state.range(1);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    cfg.seed = seed++;
    benchmark::DoNotOptimize(simulate_path(field, cfg, InnovationSpec{Family::gaussian}).values.data());
  }
}
BENCHMARK(BM_BruteForcePath)->Args({512, 64})->Unit(benchmark::kMillisecond);

// Exact variance on the infinite horizon; range(0) = N.
void BM_ExactVariance(benchmark::State& state) {
  const CoefficientField field(kBoundary, numerics::kUnbounded);
  for (auto _ : state) benchmark::DoNotOptimize(exact_variance(field, state.range(0)));
}
BENCHMARK(BM_ExactVariance)->Arg(1024)->Arg(65536)->Unit(benchmark::kMillisecond);

// ||f_N *_1 f_N|| for the partial-sum kernel at M = 256; range(0) = N.
void BM_ContractionNorm(benchmark::State& state) {
  const CoefficientField field(kBoundary, 256);
  const double N = static_cast<double>(state.range(0));
  const SymmetricKernel f = partial_sum_kernel(field, state.range(0), normalization_factor(regime_of(field), N));
  for (auto _ : state) benchmark::DoNotOptimize(contraction_norm(f, 1));
  state.counters["entries"] = static_cast<double>(f.size());
}
BENCHMARK(BM_ContractionNorm)->Arg(256)->Arg(2048)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
