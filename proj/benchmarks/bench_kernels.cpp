#include <benchmark/benchmark.h>

#include <vector>

#include "astat/korovkin.hpp"
#include "astat/operators.hpp"
#include "astat/summability.hpp"

namespace {

void BM_BinomialWeights(benchmark::State& state) {
  const auto n = static_cast<astat::Index>(state.range(0));
  for (auto _ : state) {
    auto w = astat::binomial_weights(n, 0.37);
    benchmark::DoNotOptimize(w.weights.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BinomialWeights)->RangeMultiplier(10)->Range(10, 100000)->Complexity();

void BM_KernelTable(benchmark::State& state) {
  const auto n = static_cast<astat::Index>(state.range(0));
  const auto grid = astat::EvaluationGrid::uniform(1);
  for (auto _ : state) {
    astat::KernelTable table(n, grid.p_values());
    benchmark::DoNotOptimize(table.size());
  }
}
BENCHMARK(BM_KernelTable)->RangeMultiplier(10)->Range(10, 10000);

void BM_SupNormErrorSeparable(benchmark::State& state) {
  const auto n = static_cast<astat::Index>(state.range(0));
  const auto grid = astat::EvaluationGrid::uniform(2);
  const auto suite = astat::test_suite(2);
  const auto family = astat::OperatorFamily::perturbed(2, astat::make_square_perturbation(2.0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(astat::sup_norm_error(family, n, suite.functions[3], grid));
  }
}
BENCHMARK(BM_SupNormErrorSeparable)->Arg(16)->Arg(256)->Arg(4096);

void BM_BbhDensePoint(benchmark::State& state) {
  const auto n = static_cast<astat::Index>(state.range(0));
  const auto f = astat::TargetFunction::dense(
      "dense", 2, [](std::span<const double> x) { return x[0] / (1.0 + x[0] + x[1]); });
  const astat::GridPoint point({0.7, 2.5});
  for (auto _ : state) {
    benchmark::DoNotOptimize(astat::bbh_eval(n, f, point));
  }
}
BENCHMARK(BM_BbhDensePoint)->Arg(8)->Arg(64)->Arg(256);

void BM_DensityTailC1(benchmark::State& state) {
  const auto j = static_cast<astat::Index>(state.range(0));
  const auto a = astat::make_cesaro_c1();
  const auto u = astat::make_square_perturbation(2.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(astat::density_tail(a, u, 1.0, 0.5, j, j));
  }
}
BENCHMARK(BM_DensityTailC1)->RangeMultiplier(10)->Range(100, 100000);

}  // namespace

BENCHMARK_MAIN();
