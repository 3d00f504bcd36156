#include <benchmark/benchmark.h>

#include <random>

#include "ncp/cpt_solver.hpp"

namespace {

void BM_ChoquetPlus(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::vector<ncp::DiscreteLaw::Atom> atoms;
  const int n = static_cast<int>(state.range(0));
  for (int i = 0; i < n; ++i) atoms.push_back({val(rng), 1.0 / n});
  const ncp::DiscreteLaw law = ncp::DiscreteLaw::from_samples(std::move(atoms), 1e-12);
  const auto u = ncp::make_builtin_utility("capped_linear", {{"slope", 1.0}, {"cap", 1.0}});
  const auto w = ncp::make_builtin_distortion("power", {{"gamma", 0.7}});
  for (auto _ : state) {
    benchmark::DoNotOptimize(ncp::choquet_plus(law, u, w));
  }
}

}  // namespace

BENCHMARK(BM_ChoquetPlus)->Arg(8)->Arg(64)->Arg(512);
BENCHMARK_MAIN();
