#include <benchmark/benchmark.h>

#include <random>

#include "statesel/benchgen.hpp"
#include "statesel/cost.hpp"
#include "statesel/dmdc.hpp"
#include "statesel/ga.hpp"
#include "statesel/prefilter.hpp"
#include "statesel/rfe.hpp"

using namespace statesel;

namespace {

Eigen::MatrixXd noise(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

struct Overshadow {
  TimeSeriesDataset train;
  TimeSeriesDataset test;
  IndexSet pool;
};

const Overshadow& overshadow() {
  static const Overshadow data = [] {
    const GeneratedDataset gen = simulate_synth(default_overshadow_spec());
    auto [train, test] = split(gen.data, {0.8});
    IndexSet pool = prefilter(train, {}).kept;
    return Overshadow{std::move(train), std::move(test), std::move(pool)};
  }();
  return data;
}

}  // namespace

static void BM_FitDynamics(benchmark::State& state) {
  const auto n = state.range(0);
  const auto L = state.range(1);
  SnapshotSet s;
  s.X = noise(n, L, 1);
  s.Xp = noise(n, L, 2);
  s.V = noise(2, L, 3);
  for (auto _ : state) benchmark::DoNotOptimize(fit_dynamics(s));
  state.SetItemsProcessed(state.iterations() * L);
}
BENCHMARK(BM_FitDynamics)->Args({2, 1000})->Args({8, 1000})->Args({8, 10000})->Args({20, 10000});

static void BM_Cost(benchmark::State& state) {
  const auto L = state.range(0);
  ChannelScales sc;
  sc.sigma_x = Eigen::VectorXd::Ones(8);
  sc.sigma_y = Eigen::VectorXd::Ones(3);
  const Eigen::MatrixXd xp = noise(8, L, 4), xt = noise(8, L, 5), yp = noise(3, L, 6), yt = noise(3, L, 7);
  for (auto _ : state) benchmark::DoNotOptimize(cost(xp, yp, xt, yt, sc));
  state.SetItemsProcessed(state.iterations() * L);
}
BENCHMARK(BM_Cost)->Arg(1000)->Arg(100000);

static void BM_MergedSearch(benchmark::State& state) {
  const auto& d = overshadow();
  RfeConfig cfg;
  cfg.max_states = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(merged_search(d.train, d.test, d.pool, cfg));
  state.counters["subsets"] = static_cast<double>(count_subsets_capped(d.pool.size(), cfg.max_states));
}
BENCHMARK(BM_MergedSearch)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_GaSelect(benchmark::State& state) {
  const auto& d = overshadow();
  GaConfig cfg;
  cfg.population_size = static_cast<std::size_t>(state.range(0));
  cfg.restarts = 2;
  cfg.max_states = 4;
  for (auto _ : state) benchmark::DoNotOptimize(ga_select(d.train, d.test, d.pool, cfg));
}
BENCHMARK(BM_GaSelect)->Arg(48)->Arg(480)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
