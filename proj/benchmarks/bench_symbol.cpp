#include <benchmark/benchmark.h>

#include <random>

#include "speclab/symbol.hpp"

using namespace speclab::symbols;
using speclab::num::Cplx;

namespace {

ClassicalSymbol random_symbol(int terms, unsigned seed) {
  const SymbolCaps caps{8, 6, 6};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> ki(-3, 3), ai(0, 2), mi(0, 2);
  std::uniform_real_distribution<double> u(-1, 1);
  ClassicalSymbol s(caps);
  for (int t = 0; t < terms; ++t)
    s.accumulate(SymbolKey{{ki(rng), ki(rng)}, {ai(rng), ai(rng)}, mi(rng)}, Cplx(u(rng), u(rng)));
  return s;
}

void BM_symbol_product(benchmark::State& state) {
  auto f = random_symbol((int)state.range(0), 1);
  auto g = random_symbol((int)state.range(0), 2);
  for (auto _ : state) benchmark::DoNotOptimize(f * g);
}
BENCHMARK(BM_symbol_product)->Arg(32)->Arg(128);

void BM_poisson_bracket(benchmark::State& state) {
  auto f = random_symbol((int)state.range(0), 3);
  auto g = random_symbol((int)state.range(0), 4);
  for (auto _ : state) benchmark::DoNotOptimize(poisson_bracket(f, g));
}
BENCHMARK(BM_poisson_bracket)->Arg(32)->Arg(128);

void BM_moyal_bracket(benchmark::State& state) {
  OperatorSymbol f(random_symbol(64, 5));
  OperatorSymbol g(random_symbol(64, 6));
  for (auto _ : state) benchmark::DoNotOptimize(moyal_bracket(f, g, (int)state.range(0)));
}
BENCHMARK(BM_moyal_bracket)->Arg(0)->Arg(2);

}  // namespace
