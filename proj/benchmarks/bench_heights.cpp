#include <benchmark/benchmark.h>

#include <heightinterp/heights.hpp>

using namespace heightinterp;

namespace {

std::vector<Rational> random_rationals(std::size_t count, unsigned bits) {
  gmp_randstate_t st;
  gmp_randinit_mt(st);
  gmp_randseed_ui(st, 31337);
  std::vector<Rational> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Int num, den;
    mpz_urandomb(num.get_mpz_t(), st, bits);
    mpz_urandomb(den.get_mpz_t(), st, bits);
    out.push_back(Rational(num, den + 1));
  }
  gmp_randclear(st);
  return out;
}

void HeightOfPair(benchmark::State& state) {
  auto qs = random_rationals(2048, static_cast<unsigned>(state.range(0)));
  std::size_t i = 0;
  for (auto _ : state) {
    const Rational& a = qs[i % qs.size()];
    const Rational& b = qs[(i + 1) % qs.size()];
    benchmark::DoNotOptimize(mult_height(std::vector<Rational>{a, b, a * b}).value);
    ++i;
  }
}
BENCHMARK(HeightOfPair)->Arg(64)->Arg(256)->Arg(1024)->Arg(4096);

void LogHeight(benchmark::State& state) {
  Int h(1);
  h <<= static_cast<unsigned>(state.range(0));
  h -= 1;
  Rational eps(1, 1000000000);
  for (auto _ : state) benchmark::DoNotOptimize(log_height({h}, eps).lo);
}
BENCHMARK(LogHeight)->Arg(64)->Arg(4096)->Arg(65536);

void CertifiedLogCompare(benchmark::State& state) {
  Int a(1), b(1);
  a <<= 1000;
  b <<= 999;
  a -= 3;
  b -= 7;
  for (auto _ : state) benchmark::DoNotOptimize(certified_log_le(b, a, Rational(1)));
}
BENCHMARK(CertifiedLogCompare);

}  // namespace

BENCHMARK_MAIN();
