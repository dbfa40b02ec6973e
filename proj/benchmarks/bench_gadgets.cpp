#include <benchmark/benchmark.h>

#include <heightinterp/gadgets.hpp>

using namespace heightinterp;

namespace {

void FourSquaresDesk(benchmark::State& state) {
  Int n(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(four_squares(n)[0]);
}
BENCHMARK(FourSquaresDesk)->Arg(1000)->Arg(1000000)->Arg(999999999999);

void WitnessA(benchmark::State& state) {
  Rational x(7, 2), y(Int(state.range(0)), Int(state.range(0) - 1));
  for (auto _ : state) benchmark::DoNotOptimize(witness_A(x, y).size());
}
BENCHMARK(WitnessA)->Arg(100)->Arg(10000);

void CheckWitnessA(benchmark::State& state) {
  GadgetInstance g = gadget_A();
  Assignment w = witness_A(Rational(8), Rational(7));
  for (auto _ : state) benchmark::DoNotOptimize(check_witness(g.formula, w));
}
BENCHMARK(CheckWitnessA);

}  // namespace

