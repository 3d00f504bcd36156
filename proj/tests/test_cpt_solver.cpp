#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ncp/cpt_solver.hpp"
#include "ncp/dp_solver.hpp"
#include "test_helpers.hpp"

using namespace ncp;
using ncptest::coin_tree;
using ncptest::iid_tree;

namespace {

CPTPreference cpt_pref(double w_plus_gamma, double w_minus_gamma, double loss_slope = 1.0) {
  CPTPreference p;
  p.u_plus = make_builtin_utility("cara_capped", {});
  p.u_minus = make_builtin_utility("linear", {{"slope", loss_slope}});
  p.w_plus = w_plus_gamma == 1.0 ? make_builtin_distortion("identity", {})
                                 : make_builtin_distortion("power", {{"gamma", w_plus_gamma}});
  p.w_minus = w_minus_gamma == 1.0 ? make_builtin_distortion("identity", {})
                                   : make_builtin_distortion("power", {{"gamma", w_minus_gamma}});
  return p;
}

DiscreteLaw law_of(std::vector<DiscreteLaw::Atom> atoms) {
  return DiscreteLaw::from_samples(std::move(atoms), 1e-12);
}

// midpoint Riemann sum of the defining integral, the independent oracle
double riemann_choquet(const DiscreteLaw& law, const UtilityFunction& u,
                       const DistortionFunction& w, bool positive_part, int panels) {
  double ymax = 0.0;
  for (const auto& a : law.atoms) {
    const double part = positive_part ? std::max(a.value, 0.0) : std::max(-a.value, 0.0);
    ymax = std::max(ymax, u(part));
  }
  if (ymax <= 0.0) return 0.0;
  double total = 0.0;
  const double h = ymax / panels;
  for (int i = 0; i < panels; ++i) {
    const double y = (i + 0.5) * h;
    double tail = 0.0;
    for (const auto& a : law.atoms) {
      const double part = positive_part ? std::max(a.value, 0.0) : std::max(-a.value, 0.0);
      if (u(part) >= y) tail += a.prob;
    }
    total += w(tail) * h;
  }
  return total;
}

}  // namespace

TEST_CASE("choquet gains on a two-atom law") {
  const auto u = make_builtin_utility("capped_linear", {{"slope", 1.0}, {"cap", 1.0}});
  const auto w = make_builtin_distortion("power", {{"gamma", 2.0}});
  const DiscreteLaw law = law_of({{1.0, 0.5}, {-1.0, 0.5}});
  CHECK(choquet_plus(law, u, w) == doctest::Approx(0.25));
}

TEST_CASE("identity distortion reduces the gains integral to an expectation") {
  const auto u = make_builtin_utility("capped_linear", {{"slope", 1.0}, {"cap", 100.0}});
  const auto w = make_builtin_distortion("identity", {});
  const DiscreteLaw law = law_of({{2.0, 0.3}, {0.5, 0.5}, {-1.0, 0.2}});
  CHECK(choquet_plus(law, u, w) == doctest::Approx(0.3 * 2.0 + 0.5 * 0.5).epsilon(1e-12));
}

TEST_CASE("no gains means a zero gains integral") {
  const auto u = make_builtin_utility("cara_capped", {});
  const auto w = make_builtin_distortion("power", {{"gamma", 2.0}});
  const DiscreteLaw law = law_of({{-2.0, 0.5}, {0.0, 0.5}});
  CHECK(choquet_plus(law, u, w) == 0.0);
}

TEST_CASE("choquet losses on a two-atom law") {
  const auto u = make_builtin_utility("linear", {});
  const auto w = make_builtin_distortion("power", {{"gamma", 2.0}});
  const DiscreteLaw law = law_of({{-1.0, 0.3}, {0.0, 0.7}});
  CHECK(choquet_minus(law, u, w) == doctest::Approx(0.09));
}

TEST_CASE("no losses means a zero loss integral") {
  const ScenarioTree t = coin_tree();
  const CPTPreference pref = cpt_pref(2.0, 2.0);
  // z above the claim, zero position: no loss outcomes
  const ChoquetValue v = cpt_value(t, pref, ClaimSpec{}, Strategy::zero(t), 1.0);
  CHECK(v.v_minus == 0.0);
  CHECK(v.v_plus == doctest::Approx(pref.u_plus(1.0)));
}

TEST_CASE("cpt value on the drifted coin with power distortions") {
  const ScenarioTree t = coin_tree(0.75);
  const CPTPreference pref = cpt_pref(2.0, 2.0);
  Strategy s(t.size());
  s.set(t.root(), {1.0});
  const ChoquetValue v = cpt_value(t, pref, ClaimSpec{}, s, 0.0);
  CHECK(v.v_plus == doctest::Approx((1.0 - std::exp(-1.0)) * 0.5625).epsilon(1e-12));
  CHECK(v.v_minus == doctest::Approx(0.0625).epsilon(1e-12));
  CHECK(v.v == doctest::Approx(0.29307).epsilon(1e-4));
}

TEST_CASE("identity distortions recover expected utility exactly") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(-1.5, 1.5);
  const CPTPreference pref = cpt_pref(1.0, 1.0, 2.0);
  for (int rep = 0; rep < 100; ++rep) {
    const ScenarioTree t = ncptest::random_tree(rng, 1 + static_cast<int>(rng() % 2), 3, false);
    Strategy s(t.size());
    for (std::size_t i = 0; i < t.size(); ++i)
      if (!t.is_leaf(i)) s.set(i, {unit(rng)});
    const double z = unit(rng);
    const ChoquetValue v = cpt_value(t, pref, ClaimSpec{}, s, z);
    const DiscreteLaw law = terminal_law(t, s, z, ClaimSpec{});
    const double eu = law.expect([&pref](double x) { return pref.composite(x); });
    CHECK(v.v == doctest::Approx(eu).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("choquet integrals agree with a fine Riemann sum") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::uniform_real_distribution<double> mass(0.05, 1.0);
  const auto u_plus = make_builtin_utility("capped_linear", {{"slope", 1.0}, {"cap", 1.0}});
  const auto u_minus = make_builtin_utility("linear", {});
  const auto w = make_builtin_distortion("power", {{"gamma", 1.7}});
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<DiscreteLaw::Atom> atoms;
    double total = 0.0;
    for (int i = 0; i < 10; ++i) {
      atoms.push_back({val(rng), mass(rng)});
      total += atoms.back().prob;
    }
    for (auto& a : atoms) a.prob /= total;
    const DiscreteLaw law = law_of(std::move(atoms));
    CHECK(std::abs(choquet_plus(law, u_plus, w) - riemann_choquet(law, u_plus, w, true, 1000000)) <=
          1e-6);
    CHECK(std::abs(choquet_minus(law, u_minus, w) -
                   riemann_choquet(law, u_minus, w, false, 1000000)) <= 1e-6);
  }
}

TEST_CASE("comonotonic shift adds exactly on all-gain laws") {
  const auto u = make_builtin_utility("capped_linear", {{"slope", 1.0}, {"cap", 1e9}});
  const auto w = make_builtin_distortion("power", {{"gamma", 0.7}});
  const DiscreteLaw base = law_of({{0.2, 0.25}, {0.7, 0.25}, {1.3, 0.5}});
  const double shift = 0.4;
  std::vector<DiscreteLaw::Atom> shifted;
  for (const auto& a : base.atoms) shifted.push_back({a.value + shift, a.prob});
  CHECK(choquet_plus(law_of(std::move(shifted)), u, w) ==
        doctest::Approx(choquet_plus(base, u, w) + shift * w(1.0)).epsilon(1e-12));
}

TEST_CASE("pointwise-larger loss distortion weakly lowers the value") {
  const ScenarioTree t = coin_tree(0.6);
  Strategy s(t.size());
  s.set(t.root(), {0.8});
  // gamma down => w_minus(p) = p^gamma up pointwise => V down
  const double v_high = cpt_value(t, cpt_pref(1.0, 0.5), ClaimSpec{}, s, 0.0).v;
  const double v_mid = cpt_value(t, cpt_pref(1.0, 1.0), ClaimSpec{}, s, 0.0).v;
  const double v_low = cpt_value(t, cpt_pref(1.0, 2.0), ClaimSpec{}, s, 0.0).v;
  CHECK(v_high <= v_mid + 1e-12);
  CHECK(v_mid <= v_low + 1e-12);
}

TEST_CASE("search region solves the stated equation") {
  // synthetic constants: pi = 0.25, loss rate 1, C = 1, c = 0, offset = 1
  const ScenarioTree t = coin_tree();
  CPTPreference pref = cpt_pref(1.0, 1.0);
  NAReport na;
  na.na = true;
  NAReport::PerNode pn;
  pn.node = t.root();
  pn.id = t.node(t.root()).id;
  pn.rank = 1;
  pn.beta = 1.0;
  pn.kappa = 1.0;
  pn.pi = 0.25;
  na.nodes.push_back(pn);

  const SearchRegion region = search_region(t, pref, ClaimSpec{}, -1.0, na, 0.0);
  CHECK(region.radius.at(t.root()) == doctest::Approx(9.0).epsilon(1e-9));

  // doubling the loss slope halves R - offset
  CPTPreference steep = cpt_pref(1.0, 1.0, 2.0);
  const SearchRegion region2 = search_region(t, steep, ClaimSpec{}, -1.0, na, 0.0);
  CHECK(region2.radius.at(t.root()) == doctest::Approx(5.0).epsilon(1e-9));

  // raising pi to 1 shrinks the region
  na.nodes[0].pi = 1.0;
  const SearchRegion region3 = search_region(t, pref, ClaimSpec{}, -1.0, na, 0.0);
  CHECK(region3.radius.at(t.root()) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(region3.radius.at(t.root()) < region.radius.at(t.root()));
}

TEST_CASE("search region refuses bounded loss utilities") {
  const ScenarioTree t = coin_tree();
  CPTPreference pref = cpt_pref(1.0, 1.0);
  pref.u_minus = make_builtin_utility("cara_capped", {});
  const NAReport na = pi_bounds(t, quantitative_na(t));
  CHECK_THROWS_AS(search_region(t, pref, ClaimSpec{}, 0.0, na, 0.0), Error);
}

TEST_CASE("strategies outside the region always score below the zero strategy") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<ScenarioTree> fixtures;
  fixtures.push_back(coin_tree(0.75));
  fixtures.push_back(iid_tree(2, {1.0, -1.0}, {0.6, 0.4}));
  const CPTPreference pref = cpt_pref(0.8, 0.8);

  for (const auto& t : fixtures) {
    const NAReport na = pi_bounds(t, quantitative_na(t));
    const double z = 0.25;
    const double c = cpt_value(t, pref, ClaimSpec{}, Strategy::zero(t), z).v;
    const SearchRegion region = search_region(t, pref, ClaimSpec{}, z, na, c);

    const std::vector<std::size_t> nodes = ncptest::nonleaf_nodes(t);
    for (int rep = 0; rep < 50; ++rep) {
      // draw a strategy inside the region, then push one node beyond it
      Strategy s(t.size());
      for (std::size_t i : nodes) {
        const double r = region.radius.at(i);
        s.set(i, {(2.0 * unit(rng) - 1.0) * r});
      }
      const std::size_t bump = nodes[rng() % nodes.size()];
      const double rb = region.radius.at(bump);
      const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
      s.set(bump, {sign * rb * (1.0 + unit(rng))});
      const double v = cpt_value(t, pref, ClaimSpec{}, s, z).v;
      CHECK(v < c);
    }
  }
}

TEST_CASE("optimize_cpt with identity distortions matches the dp solver") {
  const ScenarioTree t = coin_tree(0.75);
  const CPTPreference pref = cpt_pref(1.0, 1.0);

  Preference eu;
  eu.kind = Preference::Kind::eu;
  // composite utility: cara on gains, linear on losses
  eu.utility.family = "composite";
  eu.utility.f = [&pref](double x) { return pref.composite(x); };
  eu.utility.upper_bound = 1.0;
  eu.utility.diverges_down = true;

  Config cfg;
  cfg.grid_points = 801;
  const double dp = solve(t, eu, ClaimSpec{}, 0.0, cfg).value;
  const CPTResult res = optimize_cpt(t, pref, ClaimSpec{}, 0.0, cfg);
  CHECK(res.value.v == doctest::Approx(dp).epsilon(1e-3).scale(1.0));
  CHECK(res.converged);
  CHECK(res.value.v >= cpt_value(t, pref, ClaimSpec{}, Strategy::zero(t), 0.0).v - 1e-12);
}

TEST_CASE("symmetric coin with loss-heavy symmetric preference keeps theta at zero") {
  const ScenarioTree t = coin_tree();
  CPTPreference pref;
  pref.u_plus = make_builtin_utility("capped_linear", {{"slope", 1.0}, {"cap", 50.0}});
  pref.u_minus = make_builtin_utility("linear", {{"slope", 2.0}});
  pref.w_plus = make_builtin_distortion("identity", {});
  pref.w_minus = make_builtin_distortion("identity", {});

  const CPTResult res = optimize_cpt(t, pref, ClaimSpec{}, 0.0);
  const Vec* theta = res.strategy.find(t.root());
  REQUIRE(theta != nullptr);
  CHECK(std::abs((*theta)[0]) <= 1e-6);
  CHECK(res.value.v == doctest::Approx(0.0).epsilon(1e-9).scale(1.0));
}

TEST_CASE("optimize_cpt matches an exhaustive grid on a one-period instance") {
  const ScenarioTree t = coin_tree(0.7);
  const CPTPreference pref = cpt_pref(0.7, 1.4);
  const double z = 0.1;
  const CPTResult res = optimize_cpt(t, pref, ClaimSpec{}, z);

  double best = -1e300;
  const double r = res.region.radius.at(t.root());
  for (double th = -r; th <= r; th += 0.001) {
    Strategy s(t.size());
    s.set(t.root(), {th});
    best = std::max(best, cpt_value(t, pref, ClaimSpec{}, s, z).v);
  }
  CHECK(res.value.v == doctest::Approx(best).epsilon(1e-3).scale(1.0));
  CHECK(res.value.v + 1e-9 >= best - 1e-6);
}

TEST_CASE("rank-2 optimize_cpt agrees with the dp solver under identity distortions") {
  // two assets, four children spanning the plane
  std::vector<NodeSpec> specs;
  specs.push_back({"root", 0, std::nullopt, 1.0, {0.0, 0.0}});
  const std::vector<Vec> incs{{1.0, 0.2}, {-1.0, 0.1}, {0.3, 1.0}, {-0.2, -1.0}};
  const std::vector<double> probs{0.3, 0.3, 0.2, 0.2};
  for (std::size_t i = 0; i < incs.size(); ++i)
    specs.push_back({"c" + std::to_string(i), 1, std::string("root"), probs[i], incs[i]});
  const ScenarioTree t = ScenarioTree::build(1, 2, specs);

  const CPTPreference pref = cpt_pref(1.0, 1.0);
  Preference eu;
  eu.kind = Preference::Kind::eu;
  eu.utility.family = "composite";
  eu.utility.f = [&pref](double x) { return pref.composite(x); };
  eu.utility.upper_bound = 1.0;
  eu.utility.diverges_down = true;

  Config cfg;
  cfg.grid_points = 301;
  const double dp = solve(t, eu, ClaimSpec{}, 0.0, cfg).value;
  const CPTResult res = optimize_cpt(t, pref, ClaimSpec{}, 0.0, cfg);
  CHECK(std::abs(res.value.v - dp) <= 1e-3);
}

TEST_CASE("optimize_cpt refuses arbitrage markets") {
  std::vector<NodeSpec> specs{
      {"root", 0, std::nullopt, 1.0, {0.0}},
      {"a", 1, std::string("root"), 0.5, {1.0}},
      {"b", 1, std::string("root"), 0.5, {2.0}},
  };
  const ScenarioTree t = ScenarioTree::build(1, 1, specs);
  CHECK_THROWS_AS(optimize_cpt(t, cpt_pref(1.0, 1.0), ClaimSpec{}, 0.0), Error);
}

TEST_CASE("an exhausted search budget is flagged, not hidden") {
  const ScenarioTree t = coin_tree(0.75);
  Config cfg;
  cfg.cpt_eval_budget = 30;
  const CPTResult res = optimize_cpt(t, cpt_pref(0.8, 0.8), ClaimSpec{}, 0.0, cfg);
  CHECK_FALSE(res.converged);
  // the best-found value still dominates the zero strategy
  CHECK(res.value.v >=
        cpt_value(t, cpt_pref(0.8, 0.8), ClaimSpec{}, Strategy::zero(t), 0.0).v - 1e-12);
}
