// Serial reference paths against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <omp.h>

#include <algorithm>
#include <vector>

#include "forumsim/config.hpp"
#include "forumsim/experiment.hpp"

using namespace forumsim;

namespace {

ExperimentConfig demo_experiment(int repetitions, int threads) {
  ExperimentConfig cfg;
  cfg.name = "bench";
  cfg.repetitions = repetitions;
  cfg.master_seed = 20251016;
  cfg.parallelism = threads;
  cfg.trial.topic = default_topic();
  cfg.trial.personas = default_personas();
  cfg.trial.rounds_total = 5;
  const ScriptedPolicy policies[] = {ScriptedPolicy::conformist(1), ScriptedPolicy::stubborn(),
                                     ScriptedPolicy::seeded_random(11), ScriptedPolicy::conformist(1),
                                     ScriptedPolicy::contrarian(1), ScriptedPolicy::seeded_random(29)};
  for (std::size_t i = 0; i < cfg.trial.personas.size(); ++i) {
    cfg.trial.backends.emplace(cfg.trial.personas[i].id, policies[i % 6]);
  }
  return cfg;
}

std::vector<Transcript> transcripts(int repetitions) {
  std::vector<Transcript> out;
  for (auto& t : run_trials_serial(demo_experiment(repetitions, 1), nullptr)) out.push_back(std::move(t.transcript));
  return out;
}

void BM_TrialsSerial(benchmark::State& state) {
  const auto cfg = demo_experiment(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(run_trials_serial(cfg, nullptr));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_TrialsParallel(benchmark::State& state) {
  const auto cfg = demo_experiment(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(run_trials_parallel(cfg, nullptr));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_MetricsSerial(benchmark::State& state) {
  const auto ts = transcripts(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(compute_metrics_serial(ts, MajorityScope::Inclusive));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_MetricsParallel(benchmark::State& state) {
  const auto ts = transcripts(static_cast<int>(state.range(0)));
  const int threads = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(compute_metrics_parallel(ts, MajorityScope::Inclusive, threads));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void thread_args(benchmark::internal::Benchmark* b) {
  const int max_threads = std::max(omp_get_max_threads(), 1);
  for (int reps : {25, 1000}) {
    for (int t = 1; t <= max_threads; t *= 2) b->Args({reps, t});
    if ((max_threads & (max_threads - 1)) != 0) b->Args({reps, max_threads});
  }
}

}  // namespace

BENCHMARK(BM_TrialsSerial)->Arg(25)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrialsParallel)->Apply(thread_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MetricsSerial)->Arg(25)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MetricsParallel)->Apply(thread_args)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
