#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ncp/cpt_solver.hpp"
#include "ncp/dp_solver.hpp"
#include "ncp/json_io.hpp"
#include "test_helpers.hpp"

using namespace ncp;

namespace {

const char* kCoinTree = R"({
  "horizon": 1,
  "assets": 1,
  "nodes": [
    {"id": "root", "time": 0, "prob": 1.0, "price": [0.0]},
    {"id": "u", "time": 1, "parent": "root", "prob": 0.75, "price": [1.0]},
    {"id": "d", "time": 1, "parent": "root", "prob": 0.25, "price": [-1.0]}
  ],
  "claim": {"u": 0.5}
})";

}  // namespace

TEST_CASE("tree files parse into validated trees") {
  const TreeBundle bundle = parse_tree(kCoinTree);
  CHECK(bundle.tree.horizon() == 1);
  CHECK(bundle.tree.assets() == 1);
  CHECK(bundle.tree.size() == 3);
  CHECK(validate_tree(bundle.tree).ok);
  CHECK(bundle.claim.at(*bundle.tree.find("u")) == doctest::Approx(0.5));
  CHECK(bundle.claim.at(*bundle.tree.find("d")) == 0.0);
}

TEST_CASE("unknown fields are rejected") {
  CHECK_THROWS_AS(parse_tree(R"({"horizon":1,"assets":1,"nodes":[],"extra":1})"), Error);
  CHECK_THROWS_AS(
      parse_tree(
          R"({"horizon":1,"assets":1,"nodes":[{"id":"r","time":0,"prob":1,"price":[0],"color":"red"}]})"),
      Error);
}

TEST_CASE("structural errors are reported as input errors") {
  CHECK_THROWS_AS(parse_tree("{"), Error);                 // malformed
  CHECK_THROWS_AS(parse_tree(R"({"assets":1,"nodes":[]})"), Error);  // missing horizon
  // claim on an unknown node
  CHECK_THROWS_AS(
      parse_tree(
          R"({"horizon":1,"assets":1,"nodes":[{"id":"r","time":0,"prob":1,"price":[0]}],"claim":{"x":1}})"),
      Error);
  try {
    parse_tree("{nope");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == errc::input);
    CHECK(std::string(e.what()).find("malformed JSON") != std::string::npos);
  }
}

TEST_CASE("preferences parse for both kinds") {
  const Preference eu = parse_preference(
      R"({"kind":"eu","utility":{"family":"cara_capped","params":{"lambda":2.0}}})");
  CHECK(eu.kind == Preference::Kind::eu);
  CHECK(eu.utility(1.0) == doctest::Approx(1.0 - std::exp(-2.0)));

  const Preference cpt = parse_preference(R"({
    "kind": "cpt",
    "u_plus": {"family": "cara_capped"},
    "u_minus": {"family": "linear", "params": {"slope": 2.0}},
    "w_plus": {"family": "power", "params": {"gamma": 0.7}},
    "w_minus": {"family": "identity"}
  })");
  CHECK(cpt.kind == Preference::Kind::cpt);
  CHECK(cpt.cpt.u_minus(2.0) == doctest::Approx(4.0));

  CHECK_THROWS_AS(parse_preference(R"({"kind":"mean_variance"})"), Error);
  CHECK_THROWS_AS(
      parse_preference(R"({"kind":"eu","utility":{"family":"cara_capped"},"extra":0})"), Error);
}

TEST_CASE("NA report round-trips losslessly") {
  const TreeBundle bundle = parse_tree(kCoinTree);
  const NAReport rep = pi_bounds(bundle.tree, quantitative_na(bundle.tree));
  const std::string once = to_json(bundle.tree, rep);
  const NAReport back = parse_na_report(bundle.tree, once);
  CHECK(to_json(bundle.tree, back) == once);
  CHECK(back.na == rep.na);
  CHECK(back.nodes[0].beta.value() == rep.nodes[0].beta.value());
}

TEST_CASE("solve report round-trips losslessly") {
  const TreeBundle bundle = parse_tree(kCoinTree);
  Preference pref;
  pref.kind = Preference::Kind::eu;
  pref.utility = make_builtin_utility("cara_capped", {});
  Config cfg;
  cfg.grid_points = 401;
  const SolveResult res = solve(bundle.tree, pref, bundle.claim, 0.0, cfg);
  const std::string once = to_json(bundle.tree, res);
  const SolveResult back = parse_solve_report(bundle.tree, once);
  CHECK(to_json(bundle.tree, back) == once);
  CHECK(back.value == res.value);
}

TEST_CASE("CPT report round-trips losslessly") {
  const TreeBundle bundle = parse_tree(kCoinTree);
  CPTPreference pref;
  pref.u_plus = make_builtin_utility("cara_capped", {});
  pref.u_minus = make_builtin_utility("linear", {});
  pref.w_plus = make_builtin_distortion("power", {{"gamma", 0.8}});
  pref.w_minus = make_builtin_distortion("identity", {});
  const CPTResult res = optimize_cpt(bundle.tree, pref, bundle.claim, 0.0);
  const std::string once = to_json(bundle.tree, res);
  const CPTResult back = parse_cpt_report(bundle.tree, once);
  CHECK(to_json(bundle.tree, back) == once);
}

TEST_CASE("curve report round-trips losslessly") {
  CurveResult curve;
  curve.points = {{-1.0, -0.735758882342885}, {0.0, 0.1339745962155614}};
  curve.max_jump = 0.8697334785584464;
  curve.nondecreasing = true;
  const std::string once = to_json(curve);
  const CurveResult back = parse_curve_report(once);
  CHECK(to_json(back) == once);
}
