#include <epd/integrate.hpp>
#include <epd/model.hpp>

#include <benchmark/benchmark.h>

namespace {

void solve(benchmark::State& state, const char* name)
{
  const auto m = epd::make_builtin(name);
  const auto p = epd::benchmark_centers(name, 1).front();
  const auto t = epd::benchmark_times(name);
  for (auto _ : state) {
    benchmark::DoNotOptimize(epd::solve_ivp(m, p, m.default_initial_state, t));
  }
}

void BM_SolveExponential(benchmark::State& s) { solve(s, "exponential"); }
void BM_SolveLogistic(benchmark::State& s) { solve(s, "logistic"); }
void BM_SolveTargetCell(benchmark::State& s) { solve(s, "target_cell_limited"); }

} // namespace

BENCHMARK(BM_SolveExponential);
BENCHMARK(BM_SolveLogistic);
BENCHMARK(BM_SolveTargetCell);
