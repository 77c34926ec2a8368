#include <benchmark/benchmark.h>

#include <vector>

#include "cmdp/cece.hpp"
#include "cmdp/cluster.hpp"
#include "cmdp/eval.hpp"
#include "cmdp/planning.hpp"
#include "cmdp/simulate.hpp"

namespace {

void BM_FiniteHorizonDp(benchmark::State& state) {
  const int s = static_cast<int>(state.range(0));
  const auto cmdp = cmdp::generate_random_cmdp(s, 4, 1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(cmdp::optimal_finite_horizon(cmdp.contexts[0], 2000).optimal_value);
  state.SetItemsProcessed(state.iterations() * 2000LL * s * 4 * s);
}
BENCHMARK(BM_FiniteHorizonDp)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_SimulateEpisode(benchmark::State& state) {
  const auto cmdp = cmdp::generate_random_cmdp(100, 2, 5, 2);
  const auto policy = cmdp::Policy::uniform(2);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(cmdp::simulate_episode(cmdp, policy, state.range(0), ++seed));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateEpisode)->Arg(1000)->Arg(8000);

void BM_KMeans(benchmark::State& state) {
  const int horizon = static_cast<int>(state.range(0));
  const auto cmdp = cmdp::generate_random_cmdp(100, 2, 5, 3);
  std::vector<cmdp::Trajectory> data;
  for (int h = 0; h < 100; ++h) data.push_back(cmdp::simulate_episode(cmdp, cmdp::Policy::uniform(2), horizon, h));
  for (auto _ : state)
    benchmark::DoNotOptimize(cmdp::kmeans_cluster(data, 5, {100, 2}, cmdp::KMeansOptions{}, 4).score);
}
BENCHMARK(BM_KMeans)->Arg(1000)->Arg(8000)->Unit(benchmark::kMillisecond);

void BM_MinL1Classify(benchmark::State& state) {
  const auto cmdp = cmdp::generate_random_cmdp(100, 4, 20, 5);
  std::vector<cmdp::TransitionKernel> models;
  for (const auto& m : cmdp.contexts) models.push_back(m.kernel);
  const auto t = cmdp::simulate_episode(cmdp, cmdp::Policy::uniform(4), 600, 6);
  for (auto _ : state) benchmark::DoNotOptimize(cmdp::min_l1_classify(t, models));
}
BENCHMARK(BM_MinL1Classify);

void BM_ContextMatching(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const auto truth = cmdp::generate_random_cmdp(10, 2, k, 7);
  const auto other = cmdp::generate_random_cmdp(10, 2, k, 8);
  std::vector<cmdp::TransitionKernel> est;
  for (const auto& m : other.contexts) est.push_back(m.kernel);
  for (auto _ : state) benchmark::DoNotOptimize(cmdp::cmdp_match(truth, est).epsilon);
}
BENCHMARK(BM_ContextMatching)->Arg(5)->Arg(8)->Arg(20)->Arg(40);

}  // namespace

BENCHMARK_MAIN();
