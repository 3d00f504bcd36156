#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ncp/phenomena.hpp"

using namespace ncp;

TEST_CASE("nonexistence sweep on the bounded-below family") {
  const auto u = make_builtin_utility("bounded_below", {{"a", 0.5}});
  const DivergenceSweep sweep = nonexistence_sweep(0.5, u, {0.0, 1.0, 2.0});
  REQUIRE(sweep.values.size() == 3);
  // closed form: E u(phi dS) = (1-a)/2 * (1 - e^{-phi})
  CHECK(sweep.values[0] == doctest::Approx(0.0));
  CHECK(sweep.values[1] == doctest::Approx(0.15803).epsilon(1e-4));
  CHECK(sweep.values[1] ==
        doctest::Approx(0.5 * ((1 - std::exp(-1.0)) + 0.5 * (std::exp(-1.0) - 1.0))));
  CHECK(sweep.values[2] == doctest::Approx(0.21617).epsilon(1e-4));
  CHECK(sweep.strictly_increasing);
  // the supremum (1-a)/2 is approached but never attained
  CHECK(sweep.limit_estimate == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(sweep.sup_gap > 0.0);
}

TEST_CASE("the sweep is strictly increasing up to phi = 20 on fine grids") {
  const auto u = make_builtin_utility("bounded_below", {{"a", 0.5}});
  std::vector<double> grid;
  for (double p = 0.0; p <= 20.0 + 1e-12; p += 0.1) grid.push_back(p);
  const DivergenceSweep sweep = nonexistence_sweep(0.5, u, grid);
  CHECK(sweep.strictly_increasing);
  CHECK(sweep.sup_gap > 0.0);
  // gap to the supremum shrinks monotonically along the grid
  for (std::size_t i = 1; i < sweep.values.size(); ++i)
    CHECK(sweep.limit_estimate - sweep.values[i] <
          sweep.limit_estimate - sweep.values[i - 1]);
}

TEST_CASE("a symmetric bounded utility yields a flat sweep") {
  // tanh-like: u'(phi) = u'(-phi), so the objective cannot strictly increase
  UtilityFunction u;
  u.family = "tanh";
  u.f = [](double x) { return std::tanh(x); };
  u.upper_bound = 1.0;
  u.diverges_down = false;
  const DivergenceSweep sweep = nonexistence_sweep(0.5, u, {0.0, 1.0, 2.0});
  CHECK_FALSE(sweep.strictly_increasing);
  for (double v : sweep.values) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("the sweep refuses diverging utilities") {
  const auto u = make_builtin_utility("cara_capped", {});
  CHECK_THROWS_AS(nonexistence_sweep(0.5, u, {0.0, 1.0}), Error);
}

TEST_CASE("ladder rectangle probabilities are exact") {
  RandomnessLadder rung;
  rung.n = 2;
  // n=2, a=0.3, b=0.5: mass 0.25 vs product 0.15
  CHECK(rung.rectangle_prob(0.3, 0.5) == doctest::Approx(0.25));
  CHECK(std::abs(rung.rectangle_prob(0.3, 0.5) - 0.3 * 0.5) == doctest::Approx(0.10));
}

TEST_CASE("grid-aligned rectangles have zero defect") {
  for (int n : {2, 3, 5, 8}) {
    RandomnessLadder rung;
    rung.n = n;
    for (int k = 0; k <= n; ++k) {
      const double a = static_cast<double>(k) / n;
      for (double b : {0.0, 0.25, 0.5, 0.75, 1.0})
        CHECK(std::abs(rung.rectangle_prob(a, b) - a * b) <= 1e-12);
    }
  }
}

TEST_CASE("ladder distances obey the 1/n bound") {
  std::vector<int> ns;
  for (int n = 1; n <= 64; ++n) ns.push_back(n);
  const auto rungs = weak_convergence_ladder(ns, 201);
  REQUIRE(rungs.size() == 64);
  for (const auto& r : rungs) {
    CHECK(r.distance <= 1.0 / r.n + 1e-12);
    CHECK(r.distance >= 0.0);
  }
  // dyadic subsequence as in the headline bound
  CHECK(rungs[0].distance <= 1.0);
  CHECK(rungs[1].distance <= 0.5);
  CHECK(rungs[3].distance <= 0.25);
  CHECK(rungs[7].distance <= 0.125);
}

TEST_CASE("counterexample market: probabilities and bands") {
  const CounterexampleMarket m = CounterexampleMarket::make(4);
  REQUIRE(m.probs.size() == 5);
  double total = 0.0;
  for (double p : m.probs) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m.probs[0] == doctest::Approx(0.5));
  CHECK(m.probs[4] == doctest::Approx(1.0 / 16.0));  // tail folded into the top band
  CHECK(m.bands_disjoint());

  // |q_k| <= 1/2 and f_k >= 3^k on a sampled grid
  for (int k = 1; k <= 4; ++k) {
    for (int i = 0; i <= 1000; ++i) {
      const double x = i / 1000.0;
      CHECK(std::abs(m.q(k, x)) <= 0.5 + 1e-12);
      CHECK(m.f(k, x) >= std::pow(3.0, k) - 1e-12);
    }
  }
  CHECK(m.phi(3, 0.2) >= 1.0);
  CHECK(m.phi(3, 0.2) <= 2.0);
}

TEST_CASE("closedness probe: distances fall and residuals tell strategies apart") {
  const ClosednessProbe probe = closedness_probe(4, {1, 2, 4, 8});
  REQUIRE(probe.distances.size() == 4);
  for (std::size_t i = 1; i < probe.distances.size(); ++i)
    CHECK(probe.distances[i].second < probe.distances[i - 1].second);

  // g = 3/2 zeroes every moment residual ...
  const ClosednessProbe::ResidualRow* threehalves = nullptr;
  const ClosednessProbe::ResidualRow* perturbed = nullptr;
  for (const auto& row : probe.residuals) {
    if (row.name == "g=3/2") threehalves = &row;
    if (row.name == "g=3/2+0.1*q1") perturbed = &row;
  }
  REQUIRE(threehalves != nullptr);
  CHECK(threehalves->max_abs <= 1e-9);
  CHECK(probe.best_max_residual <= 1e-9);

  // ... yet its law stays far from the band-uniform limit
  CHECK(probe.constant_g_distance > 0.1);

  // a trigonometric perturbation leaves the telltale residual 0.1 * ||q_1||^2
  REQUIRE(perturbed != nullptr);
  CHECK(perturbed->residuals[0] == doctest::Approx(0.1 / 8.0).epsilon(1e-6));
}
