#include <benchmark/benchmark.h>

#include <cmath>
#include <map>

#include "scare/generators.hpp"
#include "scare/kernels.hpp"
#include "scare/radi.hpp"

namespace {

using namespace scare;

const StandardProblem& heat(Index n) {
  static std::map<Index, StandardProblem> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, with_noise(gen_heat_problem(n, 7, 6, 1), {1e-3, 1e-2}, 1)).first;
  }
  return it->second;
}

void BM_SmwSolve(benchmark::State& state) {
  const Index n = state.range(0);
  const StandardProblem& p = heat(n);
  Rng rng(1);
  const Matrix f = 0.1 * rng.matrix(7, n);
  const Matrix rows = rng.matrix(state.range(1), n);
  for (auto _ : state) {
    const ShiftedFactorization fac(p.A, nullptr, 1.7);
    benchmark::DoNotOptimize(smw_solve(fac, p.B, f, rows).result.data());
  }
}
BENCHMARK(BM_SmwSolve)->Args({1357, 6})->Args({1357, 60})->Args({5177, 6})
    ->Unit(benchmark::kMillisecond);

void BM_TruncSvd(benchmark::State& state) {
  const Index n = state.range(0);
  const Index p = state.range(1);
  Rng rng(2);
  Matrix c = rng.matrix(p, n);
  // Geometric decay of the row scales, like a compressed residual factor.
  for (Index i = 0; i < p; ++i) c.row(i) *= std::pow(0.7, static_cast<double>(i));
  const double tau = 3.33e-15 * c.squaredNorm();
  for (auto _ : state) benchmark::DoNotOptimize(trunc_svd(c, tau, p).sigma.data());
}
BENCHMARK(BM_TruncSvd)->Args({1357, 30})->Args({1357, 150})->Args({1357, 600})
    ->Unit(benchmark::kMillisecond);

void BM_LTimes(benchmark::State& state) {
  const StandardProblem& p = heat(state.range(0));
  Rng rng(3);
  const Matrix c = rng.matrix(state.range(1), p.n());
  for (auto _ : state) benchmark::DoNotOptimize(ltimes(c, p.Ahat).block(0).data());
}
BENCHMARK(BM_LTimes)->Args({1357, 30})->Args({1357, 300})->Unit(benchmark::kMicrosecond);

void BM_RadiFirstSteps(benchmark::State& state) {
  const StandardProblem& p = heat(1357);
  SolveOptions o;
  o.max_iter = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(radi_solve(p, o).report.final_nres);
}
BENCHMARK(BM_RadiFirstSteps)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
