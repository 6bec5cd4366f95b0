#include <benchmark/benchmark.h>

#include <cmath>

#include "speclab/averaging.hpp"
#include "speclab/birkhoff.hpp"

using namespace speclab;
using num::Cplx;
using num::Vec2;
using symbols::ClassicalSymbol;
using symbols::OperatorSymbol;
using symbols::SymbolCaps;
using symbols::SymbolKey;

namespace {

void BM_full_pipeline(benchmark::State& state) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  const SymbolCaps caps{10, 6, 6};
  auto a = averaging::certify(Vec2{1.0, phi}, 2.0, 2.0, 30);
  ClassicalSymbol p = ClassicalSymbol::xi(caps, 0) + ClassicalSymbol::xi(caps, 1) * Cplx(phi);
  p.accumulate(SymbolKey{{0, 0}, {2, 0}, 0}, 0.5);
  p.accumulate(SymbolKey{{0, 0}, {0, 2}, 0}, 0.5);
  p.accumulate(SymbolKey{{0, 0}, {0, 1}, 1}, Cplx(0, 1));
  for (auto k : {num::Vec2i{1, 0}, num::Vec2i{1, -1}}) {
    p.accumulate(SymbolKey{k, {0, 0}, 1}, Cplx(0, 0.05));
    p.accumulate(SymbolKey{{-k[0], -k[1]}, {0, 0}, 1}, Cplx(0, 0.05));
  }
  OperatorSymbol P(p);
  const int N = (int)state.range(0);
  for (auto _ : state)
    benchmark::DoNotOptimize(birkhoff::full_normal_form_pipeline(P, a, N));
}
BENCHMARK(BM_full_pipeline)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace
