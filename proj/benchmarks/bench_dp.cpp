#include <benchmark/benchmark.h>

#include "ncp/dp_solver.hpp"
#include "ncp/tree.hpp"

namespace {

ncp::ScenarioTree iid_tree(int T) {
  std::vector<ncp::NodeSpec> specs;
  specs.push_back({"n0", 0, std::nullopt, 1.0, {0.0}});
  struct Item { std::string id; double price; };
  std::vector<Item> frontier{{"n0", 0.0}};
  int counter = 1;
  const double incs[2] = {1.0, -1.0};
  const double probs[2] = {0.75, 0.25};
  for (int t = 1; t <= T; ++t) {
    std::vector<Item> next;
    for (const auto& item : frontier) {
      for (int b = 0; b < 2; ++b) {
        const std::string id = "n" + std::to_string(counter++);
        specs.push_back({id, t, item.id, probs[b], {item.price + incs[b]}});
        next.push_back({id, item.price + incs[b]});
      }
    }
    frontier = std::move(next);
  }
  return ncp::ScenarioTree::build(T, 1, specs);
}

void BM_SolveIID(benchmark::State& state) {
  const ncp::ScenarioTree tree = iid_tree(static_cast<int>(state.range(0)));
  ncp::Preference pref;
  pref.kind = ncp::Preference::Kind::eu;
  pref.utility = ncp::make_builtin_utility("cara_capped", {});
  ncp::Config cfg;
  cfg.grid_points = static_cast<int>(state.range(1));
  for (auto _ : state) {
    const auto res = ncp::solve(tree, pref, ncp::ClaimSpec{}, 0.0, cfg);
    benchmark::DoNotOptimize(res.value);
  }
}

}  // namespace

BENCHMARK(BM_SolveIID)->Args({1, 801})->Args({2, 801})->Args({2, 2001})
    ->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
