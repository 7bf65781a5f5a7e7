#include <epd/fit.hpp>
#include <epd/rcs_data.hpp>
#include <epd/resample.hpp>

#include <benchmark/benchmark.h>

namespace {

void fit_one(benchmark::State& state, const char* name)
{
  epd::SyntheticSpec spec;
  spec.model = epd::make_builtin(name);
  spec.centers = epd::benchmark_centers(name, 1);
  spec.half_widths = epd::relative_half_widths(spec.centers, 0.1);
  spec.samples_per_center = 12;
  spec.times = epd::benchmark_times(name);
  spec.seed = 1;
  const auto syn = epd::generate_synthetic(spec);
  const auto trajs = epd::sample_trajectories(syn.data, 16, 2);
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
      epd::fit_trajectory(spec.model, trajs[k++ % trajs.size()], spec.model.default_initial_state));
  }
}

void BM_FitExponential(benchmark::State& s) { fit_one(s, "exponential"); }
void BM_FitLogistic(benchmark::State& s) { fit_one(s, "logistic"); }
void BM_FitTargetCell(benchmark::State& s) { fit_one(s, "target_cell_limited"); }

} // namespace

BENCHMARK(BM_FitExponential);
BENCHMARK(BM_FitLogistic);
BENCHMARK(BM_FitTargetCell)->Unit(benchmark::kMillisecond);
