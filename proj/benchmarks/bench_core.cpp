#include <benchmark/benchmark.h>

#include <set>
#include <string>
#include <vector>

#include "pumpwatch/corex.hpp"
#include "pumpwatch/forest.hpp"
#include "pumpwatch/graph.hpp"
#include "pumpwatch/rng.hpp"
#include "pumpwatch/synth.hpp"
#include "pumpwatch/textclf.hpp"

using namespace pumpwatch;

namespace {

const std::vector<SocialMessage>& corpus() {
  static const auto msgs = synth::labeled_messages(synth::coin_symbols(12), 2000, 0.5, 1);
  return msgs;
}

CoinRegistry registry() {
  const auto coins = synth::coin_symbols(12);
  return CoinRegistry(std::set<std::string>(coins.begin(), coins.end()), {});
}

void BM_Tokenize(benchmark::State& state) {
  const auto reg = registry();
  for (auto _ : state) {
    std::size_t n = 0;
    for (const auto& m : corpus()) n += text::tokenize(m.text, reg).size();
    benchmark::DoNotOptimize(n);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(corpus().size()));
}
BENCHMARK(BM_Tokenize)->Unit(benchmark::kMillisecond);

void BM_ClassifierTrain(benchmark::State& state) {
  const auto reg = registry();
  for (auto _ : state) benchmark::DoNotOptimize(text::PumpClassifier::train(corpus(), reg));
}
BENCHMARK(BM_ClassifierTrain)->Unit(benchmark::kMillisecond);

graph::WeightedGraph random_graph(std::size_t n, double p, std::uint64_t seed) {
  Rng rng(seed);
  graph::WeightedGraph g;
  for (std::size_t i = 0; i < n; ++i) g.add_node("n" + std::to_string(i));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.bernoulli(p)) g.add_weight(i, j, rng.uniform(1, 5));
    }
  }
  return g;
}

void BM_PageRank(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto g = random_graph(n, 8.0 / static_cast<double>(n), 3);
  for (auto _ : state) benchmark::DoNotOptimize(graph::pagerank_scores(g));
}
BENCHMARK(BM_PageRank)->Arg(200)->Arg(2000)->Unit(benchmark::kMicrosecond);

void BM_Components(benchmark::State& state) {
  const auto g = random_graph(2000, 0.002, 4);
  for (auto _ : state) benchmark::DoNotOptimize(graph::connected_components(graph::sparsify_top_k(g, 2)));
}
BENCHMARK(BM_Components)->Unit(benchmark::kMicrosecond);

void BM_Corex(benchmark::State& state) {
  const std::size_t n = 500;
  const std::size_t vars = static_cast<std::size_t>(state.range(0));
  Rng rng(5);
  std::vector<double> x(n * vars);
  std::vector<std::string> names;
  for (std::size_t j = 0; j < vars; ++j) names.push_back("v" + std::to_string(j));
  for (std::size_t i = 0; i < n; ++i) {
    const double z[2] = {rng.normal(), rng.normal()};
    for (std::size_t j = 0; j < vars; ++j) x[i * vars + j] = z[j % 2] + 0.7 * rng.normal();
  }
  corex::CorexParams p;
  p.k = 4;
  for (auto _ : state) benchmark::DoNotOptimize(corex::linear_corex(x, n, names, p));
}
BENCHMARK(BM_Corex)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_ForestTrain(benchmark::State& state) {
  Rng rng(6);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 300; ++i) {
    std::vector<double> row(30);
    for (auto& v : row) v = rng.normal();
    y.push_back(row[0] + 0.5 * row[1] > 0 ? 1 : 0);
    x.push_back(std::move(row));
  }
  forest::ForestParams p;
  p.n_trees = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(forest::RandomForest::train(x, y, p));
}
BENCHMARK(BM_ForestTrain)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_SynthGenerate(benchmark::State& state) {
  synth::Scenario s;
  s.coins = 4;
  s.duration_days = 20;
  s.pumps_per_coin = 5;
  for (auto _ : state) benchmark::DoNotOptimize(synth::generate(s));
}
BENCHMARK(BM_SynthGenerate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
