#include <benchmark/benchmark.h>

#include <cmath>

#include "speclab/oracle.hpp"

using namespace speclab;
using num::Cplx;
using symbols::ClassicalSymbol;
using symbols::OperatorSymbol;
using symbols::SymbolCaps;
using symbols::SymbolKey;

namespace {

OperatorSymbol model() {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  const SymbolCaps caps{6, 6, 6};
  ClassicalSymbol p = ClassicalSymbol::xi(caps, 0) + ClassicalSymbol::xi(caps, 1) * Cplx(phi);
  p.accumulate(SymbolKey{{0, 0}, {2, 0}, 0}, 0.5);
  p.accumulate(SymbolKey{{1, 0}, {0, 0}, 1}, Cplx(0, 0.05));
  p.accumulate(SymbolKey{{-1, 0}, {0, 0}, 1}, Cplx(0, 0.05));
  return OperatorSymbol(p);
}

quantization::QuantizationData qd_of(double h, double R) {
  quantization::QuantizationData qd;
  qd.h = h;
  qd.eps = 0.05;
  qd.window_radius = R;
  return qd;
}

void BM_build_matrix(benchmark::State& state) {
  auto P = model();
  double h = 4.0 / state.range(0);
  auto qd = qd_of(h, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(oracle::build_matrix(P, qd, 1.0));
  state.SetLabel("n ~ " + std::to_string(oracle::build_matrix(P, qd, 1.0).size()));
}
BENCHMARK(BM_build_matrix)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_eigenvalues(benchmark::State& state) {
  auto P = model();
  double h = 4.0 / state.range(0);
  auto qd = qd_of(h, 0.5);
  auto M = oracle::build_matrix(P, qd, 1.0);
  quantization::Rectangle rect{0, 0.2, 0, 0.2};
  for (auto _ : state) benchmark::DoNotOptimize(oracle::eigenvalues(M, rect));
  state.SetLabel("n = " + std::to_string(M.size()));
}
BENCHMARK(BM_eigenvalues)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
