#include <benchmark/benchmark.h>

#include "nsbfm/dgp.hpp"
#include "nsbfm/mle.hpp"

namespace {

nsbfm::SimulatedPanel draw(nsbfm::Index n) {
  nsbfm::DgpSpec spec;
  spec.dgp_case = nsbfm::DgpCase::Cointegrated;
  spec.n_units = n;
  spec.n_periods = n;
  spec.seed = 11;
  return nsbfm::simulate(spec);
}

// One alternating sweep from the truth: all factor blocks, then all unit blocks.
void BM_Sweep(benchmark::State& state) {
  const auto sim = draw(state.range(0));
  nsbfm::EstimationConfig cfg;
  cfg.n_factors = 2;
  cfg.max_outer_iterations = 1;
  for (auto _ : state) {
    auto fit = nsbfm::fit_from(sim.panel, nsbfm::LinkKind::Logit, cfg, sim.truth);
    benchmark::DoNotOptimize(fit.zhat.data());
  }
}
BENCHMARK(BM_Sweep)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_FullFit(benchmark::State& state) {
  const auto sim = draw(state.range(0));
  nsbfm::EstimationConfig cfg;
  cfg.n_factors = 2;
  for (auto _ : state) {
    auto fit = nsbfm::fit(sim.panel, nsbfm::LinkKind::Logit, cfg);
    benchmark::DoNotOptimize(fit.zhat.data());
  }
}
BENCHMARK(BM_FullFit)->Arg(100)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
