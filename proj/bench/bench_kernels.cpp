#include <benchmark/benchmark.h>

#include "msflow/degree.hpp"
#include "msflow/spectralflow.hpp"
#include "support.hpp"

using namespace msflow;

namespace {

ValidatedProblem problem(int n) {
  std::mt19937_64 rng(3);
  return validate_or_throw(support::random_polynomial(rng, n, BoundaryCondition::Preset::Dirichlet));
}

std::vector<cdouble> boundary_points(int count) {
  std::vector<cdouble> zs;
  for (int i = 0; i < count; ++i) zs.emplace_back(static_cast<double>(i) / count, 1.0);
  return zs;
}

void rho_batch_bench(benchmark::State& state, Execution exec) {
  const auto vp = problem(static_cast<int>(state.range(0)));
  const auto zs = boundary_points(64);
  for (auto _ : state) benchmark::DoNotOptimize(rho_batch(vp, zs, {}, exec));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(zs.size()));
}

void spectra_bench(benchmark::State& state, Execution exec) {
  const auto vp = problem(static_cast<int>(state.range(0)));
  std::vector<double> ts;
  for (int i = 0; i <= 32; ++i) ts.push_back(i / 32.0);
  for (auto _ : state) benchmark::DoNotOptimize(fd_spectra_batch(vp, ts, 200, exec));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(ts.size()));
}

}  // namespace

BENCHMARK_CAPTURE(rho_batch_bench, serial, Execution::Serial)->Arg(1)->Arg(3);
BENCHMARK_CAPTURE(rho_batch_bench, parallel, Execution::Parallel)->Arg(1)->Arg(3);
BENCHMARK_CAPTURE(spectra_bench, serial, Execution::Serial)->Arg(1)->Arg(3);
BENCHMARK_CAPTURE(spectra_bench, parallel, Execution::Parallel)->Arg(1)->Arg(3);

BENCHMARK_MAIN();
