// Microbenchmarks for the hot paths: pseudoinverse factorization, one
// synchronous solver round, a full solve, and one Monte Carlo trial.
// Build target only; not registered with ctest.

#include <benchmark/benchmark.h>

#include "distlr/harness.hpp"

namespace {

using distlr::Matrix;
using distlr::PartitionSpec;
using distlr::ProblemInstance;
using distlr::RngStream;
using distlr::Vector;

ProblemInstance reference_instance() {
  RngStream x_rng(42, 1ULL << 62);
  const Vector x = distlr::sample_gaussian_matrix(150, 1, x_rng).col(0);
  RngStream a_rng(42, 0);
  return distlr::generate_instance(50, 150, x, 0.0, a_rng);
}

void bm_pseudoinverse_50x75(benchmark::State& state) {
  RngStream rng(1, 0);
  const Matrix a = distlr::sample_gaussian_matrix(50, 75, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(distlr::pseudoinverse(a));
  }
}
BENCHMARK(bm_pseudoinverse_50x75);

void bm_solver_round(benchmark::State& state) {
  const ProblemInstance instance = reference_instance();
  const PartitionSpec spec = distlr::make_partition(150, 2);
  distlr::CocoaSolver solver(instance, spec, distlr::make_config(0.0, 1, 2));
  distlr::SolverState s = solver.initial_state();
  for (auto _ : state) {
    benchmark::DoNotOptimize(s = solver.step(s));
  }
}
BENCHMARK(bm_solver_round);

void bm_full_solve_t200(benchmark::State& state) {
  const ProblemInstance instance = reference_instance();
  const PartitionSpec spec = distlr::make_partition(150, 2);
  distlr::CocoaSolver solver(instance, spec, distlr::make_config(0.0, 200, 2));
  for (auto _ : state) {
    benchmark::DoNotOptimize(solver.run());
  }
}
BENCHMARK(bm_full_solve_t200);

void bm_sweep_trial(benchmark::State& state) {
  // One full Monte Carlo trial: draw the design, solve, score.
  distlr::SweepConfig config;
  config.partition_grid = {{75, 75}};
  config.trials = 1;
  config.iters = 200;
  for (auto _ : state) {
    benchmark::DoNotOptimize(distlr::run_convergence_sweep(config));
  }
}
BENCHMARK(bm_sweep_trial);

}  // namespace

BENCHMARK_MAIN();
