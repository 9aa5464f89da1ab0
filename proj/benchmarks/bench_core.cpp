#include <benchmark/benchmark.h>

#include "fxt/flows.hpp"
#include "fxt/integrate.hpp"
#include "fxt/numerics.hpp"
#include "fxt/problems.hpp"

namespace {

void BM_LuSolve(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const fxt::Matrix m = fxt::random_spd(n, 0.5, 5.0, 1);
  const fxt::Vector rhs = fxt::random_gaussian_vector(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(fxt::lu_solve(m, rhs));
}
BENCHMARK(BM_LuSolve)->Arg(4)->Arg(10)->Arg(40);

void BM_SymmetricEigenvalues(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const fxt::Matrix m = fxt::random_spd(n, 0.5, 5.0, 3);
  for (auto _ : state) benchmark::DoNotOptimize(fxt::symmetric_eigenvalues(m));
}
BENCHMARK(BM_SymmetricEigenvalues)->Arg(4)->Arg(10)->Arg(40);

void BM_FixedTimeSettle(benchmark::State& state) {
  const auto p = fxt::make_random_quadratic(10, 0.5, 5.0, 4);
  const fxt::FlowField f = fxt::build_fixed_time_flow(p, fxt::FlowParams{});
  const fxt::Vector x0 = static_cast<double>(state.range(0)) * fxt::random_unit_vector(10, 5);
  fxt::IntegratorConfig cfg;
  cfg.t_max = 30.0;
  for (auto _ : state) benchmark::DoNotOptimize(fxt::integrate(f, x0, cfg));
}
BENCHMARK(BM_FixedTimeSettle)->Arg(1)->Arg(1000);

void BM_NewtonSettle(benchmark::State& state) {
  const auto p = fxt::make_random_quadratic(10, 1e-3, 1e3, 6);
  const fxt::FlowField f = fxt::build_newton_fixed_time_flow(p, fxt::FlowParams{});
  const fxt::Vector x0 = 10.0 * fxt::random_unit_vector(10, 7);
  fxt::IntegratorConfig cfg;
  cfg.t_max = 30.0;
  for (auto _ : state) benchmark::DoNotOptimize(fxt::integrate(f, x0, cfg));
}
BENCHMARK(BM_NewtonSettle);

}  // namespace

// The packaged benchmark_main archive is built with a different LTO version, so provide main here.
BENCHMARK_MAIN();
