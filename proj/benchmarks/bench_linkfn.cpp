#include <benchmark/benchmark.h>

#include <vector>

#include "nsbfm/linkfn.hpp"

namespace {

std::vector<double> grid(int n) {
  std::vector<double> z(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) z[static_cast<std::size_t>(k)] = -40.0 + 80.0 * k / (n - 1);
  return z;
}

void BM_CellTerms(benchmark::State& state) {
  const auto kind = static_cast<nsbfm::LinkKind>(state.range(0));
  const auto z = grid(4096);
  for (auto _ : state) {
    double acc = 0.0;
    for (const double v : z) {
      const auto c = nsbfm::cell_terms(1.0, v, kind);
      acc += c.loglik + c.score_weight + c.fisher_weight;
    }
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(z.size()));
}
BENCHMARK(BM_CellTerms)->Arg(static_cast<int>(nsbfm::LinkKind::Logit))->Arg(static_cast<int>(nsbfm::LinkKind::Probit));

void BM_Evaluate(benchmark::State& state) {
  const auto kind = static_cast<nsbfm::LinkKind>(state.range(0));
  const auto z = grid(4096);
  for (auto _ : state) {
    double acc = 0.0;
    for (const double v : z) acc += nsbfm::evaluate(v, kind).k;
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(z.size()));
}
BENCHMARK(BM_Evaluate)->Arg(static_cast<int>(nsbfm::LinkKind::Logit))->Arg(static_cast<int>(nsbfm::LinkKind::Probit));

}  // namespace
