#include <benchmark/benchmark.h>

#include "pbsync/clock.hpp"
#include "pbsync/kernel.hpp"
#include "pbsync/report.hpp"
#include "pbsync/simulation.hpp"

using namespace pbsync;

// Self-rescheduling chain: the kernel's dispatch cost per event.
static void BM_KernelDispatch(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    Kernel k;
    std::uint64_t left = n;
    std::function<void()> tick = [&] {
      if (--left > 0) k.schedule_in(1000, 1, tick);
    };
    k.schedule(TrueTime{0}, 1, tick);
    benchmark::DoNotOptimize(k.run_until(TrueTime{n * 1000}));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_KernelDispatch)->Arg(1 << 10)->Arg(1 << 16);

static void BM_LocalTime(benchmark::State& state) {
  const ClockState c{12345, 1.5e-6, {}};
  std::uint64_t t = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(local_time(c, TrueTime{t}));
    t += 999'983;
  }
}
BENCHMARK(BM_LocalTime);

// Default 73-node network, hybrid or pure second level, seconds of simulated time.
static void BM_Scenario(benchmark::State& state) {
  ScenarioConfig c;
  c.protocol.level2 = state.range(0) ? Protocol::Pure1588 : Protocol::Hybrid1588Pbs;
  c.end_s = static_cast<double>(state.range(1));
  for (auto _ : state) {
    Simulation sim(c);
    sim.run();
    benchmark::DoNotOptimize(sim.estimates_applied());
  }
}
BENCHMARK(BM_Scenario)->Args({0, 60})->Args({1, 60})->Unit(benchmark::kMillisecond);

static void BM_RunScenarioWithReport(benchmark::State& state) {
  ScenarioConfig c;
  c.end_s = 60;
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario(c).samples.size());
}
BENCHMARK(BM_RunScenarioWithReport)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
