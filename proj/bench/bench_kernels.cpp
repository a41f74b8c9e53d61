// Serial reference vs OpenMP kernels.
#include <benchmark/benchmark.h>
#include <omp.h>

#include <random>

#include "slmf/facility.hpp"
#include "slmf/kernel.hpp"
#include "slmf/reformulation.hpp"
#include "slmf/solver.hpp"

namespace {

using namespace slmf;

std::vector<Vector> random_tableau(int m, int cols, Vector& rhs, Vector& cost) {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vector> rows(m, Vector(cols));
  for (auto& r : rows) {
    for (double& v : r) v = u(gen);
  }
  rhs.resize(m);
  for (double& v : rhs) v = u(gen);
  cost.resize(cols);
  for (double& v : cost) v = u(gen);
  return rows;
}

template <bool Parallel>
void BM_Pivot(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  Vector rhs, cost;
  auto rows = random_tableau(m, 3 * m, rhs, cost);
  int k = 0;
  for (auto _ : state) {
    const int r = k % m;
    const int q = (k * 7) % (3 * m);
    if (Parallel) kernel::detail::pivot_parallel(rows, rhs, cost, r, q);
    else kernel::detail::pivot_serial(rows, rhs, cost, r, q);
    ++k;
    benchmark::DoNotOptimize(rows[0][0]);
  }
  state.SetItemsProcessed(state.iterations() * m * 3 * m);
}
BENCHMARK(BM_Pivot<false>)->Arg(100)->Arg(300)->Arg(600);
BENCHMARK(BM_Pivot<true>)->Arg(100)->Arg(300)->Arg(600);

// Mixed facility instance solved by branch-and-bound with one thread or all.
void BM_FacilitySolve(benchmark::State& state) {
  facility::FacilityParams pr = facility::desk_scale({}, 4, 4);
  pr.seed = 3;
  const GameSpec spec = facility::to_game(facility::generate(pr), CardinalityMode::Mixed);
  const SingleLevelProblem prob = build_mixed_final(spec);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solver::solve(prob).objective);
  }
}
BENCHMARK(BM_FacilitySolve)->Unit(benchmark::kMillisecond);

// Enumeration oracle: serial leaves vs OpenMP task split.
void BM_Enumerate(benchmark::State& state) {
  omp_set_num_threads(static_cast<int>(state.range(0)));
  facility::FacilityParams pr = facility::desk_scale({}, 2, 2);
  pr.seed = 5;
  const GameSpec spec = facility::to_game(facility::generate(pr), CardinalityMode::Mixed);
  const SingleLevelProblem prob = build_mixed_final(spec);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solver::enumerate(prob).objective);
  }
  omp_set_num_threads(omp_get_num_procs());
}
BENCHMARK(BM_Enumerate)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
