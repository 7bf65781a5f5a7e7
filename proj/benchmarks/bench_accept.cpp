#include <epd/accept.hpp>
#include <epd/metrics.hpp>
#include <epd/random.hpp>

#include <benchmark/benchmark.h>

#include <vector>

namespace {

std::vector<double> random_values(std::size_t n, std::uint64_t seed)
{
  auto rng = epd::substream(seed, 0);
  std::vector<double> v(n);
  for (auto& x : v) {
    x = epd::uniform01(rng);
  }
  return v;
}

void BM_AcceptAndGate(benchmark::State& state)
{
  const auto losses = random_values(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) {
    const auto a = epd::accept_probabilities(losses, 100.0);
    benchmark::DoNotOptimize(epd::gate(a, 3));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Wasserstein(benchmark::State& state)
{
  const auto a = random_values(static_cast<std::size_t>(state.range(0)), 2);
  const auto b = random_values(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(epd::wasserstein1(a, b));
  }
}

void BM_CountModes(benchmark::State& state)
{
  const auto a = random_values(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(epd::count_modes(a));
  }
}

} // namespace

BENCHMARK(BM_AcceptAndGate)->Arg(1000)->Arg(100000);
BENCHMARK(BM_Wasserstein)->Arg(1000)->Arg(100000);
BENCHMARK(BM_CountModes)->Arg(1000)->Arg(10000);
