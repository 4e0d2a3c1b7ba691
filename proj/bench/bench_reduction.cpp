// Serial reference loop vs chunked OpenMP reduction on the main estimators.
// Arg 0 is the serial reference; n > 0 is the parallel path with n workers.

#include <benchmark/benchmark.h>

#include <vector>

#include "fkpath/fkmatrix.hpp"
#include "fkpath/fkschrodinger.hpp"
#include "fkpath/opalg.hpp"
#include "fkpath/potentials.hpp"
#include "fkpath/wiener.hpp"

using namespace fkpath;

namespace {

Exec exec_for(const benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  return n == 0 ? Exec::serial() : Exec::with_workers(n);
}

void BM_CharFunctional(benchmark::State& state) {
  const wiener::Ensemble ens{wiener::TimeGrid(1.0, 256), 1, 1, 20000};
  const auto f = wiener::TestFunction::indicator({1.0}, 1.0);
  const auto exec = exec_for(state);
  for (auto _ : state) benchmark::DoNotOptimize(wiener::estimate_char_functional(ens, f, exec));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(ens.n_paths));
}

void BM_GeneralizedFK(benchmark::State& state) {
  const fkmatrix::FKProblem prob(opalg::OperatorTuple({opalg::pauli::x()}), opalg::pauli::z(), 1.0, 128);
  const fkmatrix::Sampling s{10000, 3, 0, exec_for(state)};
  for (auto _ : state) benchmark::DoNotOptimize(fkmatrix::estimate_generalized_fk(prob, s));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(s.n_paths));
}

void BM_HarmonicKernel(benchmark::State& state) {
  const auto pot = fkschrodinger::make_preset("harmonic");
  const std::vector<double> q{0.0}, qp{0.5};
  const fkschrodinger::PathSampling s{20000, 128, 7, 0, exec_for(state)};
  for (auto _ : state) benchmark::DoNotOptimize(fkschrodinger::kernel(pot, q, qp, 1.0, s));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(s.n_paths));
}

}  // namespace

BENCHMARK(BM_CharFunctional)->Arg(0)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_GeneralizedFK)->Arg(0)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_HarmonicKernel)->Arg(0)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
