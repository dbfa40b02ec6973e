#include <benchmark/benchmark.h>

#include <heightinterp/curve.hpp>

using namespace heightinterp;

namespace {

void ScalarMul(benchmark::State& state) {
  Point p1 = generator();
  Int n(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(scalar_mul(n, p1).is_infinity());
}
BENCHMARK(ScalarMul)->Arg(30)->Arg(200)->Arg(1000);

void CanonicalHeightStage(benchmark::State& state) {
  // fresh point each time so the shared P1 chain cache stays out of the loop
  Point p = scalar_mul(2, generator());
  int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(canonical_height(p, k).lo);
}
BENCHMARK(CanonicalHeightStage)->Arg(4)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

