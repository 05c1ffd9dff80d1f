#include <benchmark/benchmark.h>

#include "swarmhist/chain.hpp"
#include "swarmhist/crypto.hpp"
#include "swarmhist/prob.hpp"
#include "swarmhist/sim.hpp"
#include "swarmhist/suites.hpp"

using namespace swarmhist;

namespace {

void BM_McReportWithinSerial(benchmark::State& state) {
  const ProbQuery q{25, 0.33, 3};
  for (auto _ : state) benchmark::DoNotOptimize(mc_report_within_serial(q, state.range(0), 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_McReportWithinSerial)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_McReportWithinParallel(benchmark::State& state) {
  const ProbQuery q{25, 0.33, 3};
  for (auto _ : state) benchmark::DoNotOptimize(mc_report_within(q, state.range(0), 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_McReportWithinParallel)->Arg(10000)->Unit(benchmark::kMillisecond)->UseRealTime();

void framing(benchmark::State& state, Execution exec) {
  FramingParams params;
  params.alpha = 1.0 / 3.0;
  params.runs = static_cast<std::size_t>(state.range(0));
  params.seed = 5;
  for (auto _ : state) benchmark::DoNotOptimize(run_framing_suite(params, exec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
void BM_FramingSerial(benchmark::State& s) { framing(s, Execution::serial); }
void BM_FramingParallel(benchmark::State& s) { framing(s, Execution::parallel); }
BENCHMARK(BM_FramingSerial)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FramingParallel)->Arg(20)->Unit(benchmark::kMillisecond)->UseRealTime();

void collusion(benchmark::State& state, Execution exec) {
  CollusionParams params;
  params.runs = static_cast<std::size_t>(state.range(0));
  params.seed = 6;
  for (auto _ : state) benchmark::DoNotOptimize(run_collusion_suite(params, exec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
void BM_CollusionSerial(benchmark::State& s) { collusion(s, Execution::serial); }
void BM_CollusionParallel(benchmark::State& s) { collusion(s, Execution::parallel); }
BENCHMARK(BM_CollusionSerial)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CollusionParallel)->Arg(20)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_Simulate(benchmark::State& state) {
  SimConfig cfg;
  cfg.n = static_cast<std::size_t>(state.range(0));
  cfg.p = 0.33;
  cfg.intervals = 5;
  cfg.seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(run_simulation(cfg));
}
BENCHMARK(BM_Simulate)->Arg(25)->Arg(48)->Unit(benchmark::kMillisecond);

void BM_VerifyChain(benchmark::State& state) {
  SimConfig cfg;
  cfg.n = 25;
  cfg.p = 0.33;
  cfg.intervals = static_cast<Interval>(state.range(0));
  cfg.seed = 2;
  const SimTrace trace = run_simulation(cfg);
  const LinkPtr head = trace.store.get(trace.heads.at(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        verify_chain(*head, trace.credentials[0], trace.store, cfg.intervals, trace.central_key));
  }
}
BENCHMARK(BM_VerifyChain)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
