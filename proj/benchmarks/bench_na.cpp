#include <benchmark/benchmark.h>

#include "ncp/no_arbitrage.hpp"

namespace {

ncp::ScenarioTree cross_tree() {
  std::vector<ncp::NodeSpec> specs;
  specs.push_back({"root", 0, std::nullopt, 1.0, {0.0, 0.0}});
  const double inc[4][2] = {{1, 0.2}, {-1, 0.1}, {0.3, 1}, {-0.2, -1}};
  for (int i = 0; i < 4; ++i)
    specs.push_back({"c" + std::to_string(i), 1, std::string("root"), 0.25,
                     {inc[i][0], inc[i][1]}});
  return ncp::ScenarioTree::build(1, 2, specs);
}

void BM_QuantitativeNA(benchmark::State& state) {
  const ncp::ScenarioTree tree = cross_tree();
  ncp::Config cfg;
  cfg.beta_directions = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const auto rep = ncp::quantitative_na(tree, cfg);
    benchmark::DoNotOptimize(rep.nodes[0].beta);
  }
}

}  // namespace

BENCHMARK(BM_QuantitativeNA)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
