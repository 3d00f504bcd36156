#pragma once

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "ncp/common.hpp"
#include "ncp/no_arbitrage.hpp"
#include "ncp/preferences.hpp"
#include "ncp/tree.hpp"

namespace ncp {

/// Per-node value function of wealth. Inner nodes carry a piecewise-linear
/// interpolant on a uniform grid; leaves evaluate u(x - B) exactly. Queries
/// left of the grid fall back to the terminal utility's own tail (a valid
/// floor), queries right of it return the last grid value.
struct ValueFunction {
  std::vector<double> xs;
  std::vector<double> ys;
  double cap = 1.0;                     // upper bound C
  std::function<double(double)> exact;  // set on leaves
  std::function<double(double)> tail;   // below-grid floor, u(x - max claim)

  double operator()(double x) const;
};

struct OneStepResult {
  ValueFunction vf;
  std::vector<Vec> optimizers;  // maximizing position per grid point, in R^d
};

struct SolveDiagnostics {
  double attained = 0.0;      // E u(X_T - B) of the extracted strategy, exact
  double grid_value = 0.0;    // U_0(z) read from the level-0 grid
  double consistency_gap = 0.0;  // max_t |E U_t(X_t) - value| along phi*
  bool exact_extraction = true;  // depth-exact forward pass was used
  bool certified = false;        // attained >= value - tol_solve
  std::vector<std::size_t> grid_sizes;  // per-level grid point counts
  double refinement_delta = 0.0;        // |grid_value - value|, the gap closed
                                        // by re-optimizing at exact wealths
};

struct SolveResult {
  double value = 0.0;
  double z = 0.0;
  Strategy strategy;
  std::vector<ValueFunction> value_functions;          // indexed by node
  std::vector<std::map<long, double>> strategy_bounds; // per node: n -> K(n)
  SolveDiagnostics diagnostics;
};

/// U_T per leaf: u(x - B), exact, with a sampled grid for reporting.
/// Refuses utilities that do not diverge at -inf (no existence guarantee).
std::vector<ValueFunction> terminal_value(const ScenarioTree& tree, const UtilityFunction& u,
                                          const ClaimSpec& claim, const Config& cfg = {});

/// E(u(n - B) | node): the lower envelope backing the strategy bounds.
double lower_envelope(const ScenarioTree& tree, const UtilityFunction& u, const ClaimSpec& claim,
                      std::size_t node, double n);

/// The one-step bound K(n): positions beyond it provably cannot beat the
/// zero position for wealth in [n, n+1). Derived from the children's value
/// functions and the node's (beta, kappa).
double strategy_bound(const ScenarioTree& tree, std::size_t node,
                      const std::vector<ValueFunction>& value_next, const NAReport& na,
                      const UtilityFunction& u, const ClaimSpec& claim, long n,
                      const Config& cfg = {});

/// One backward-induction step on a wealth grid: per grid point, maximize the
/// conditional expectation of the children's value functions over positions in
/// span(D) within the strategy bound.
OneStepResult one_step_value(const ScenarioTree& tree, std::size_t node,
                             const std::vector<ValueFunction>& value_next, const NAReport& na,
                             const UtilityFunction& u, const ClaimSpec& claim,
                             const std::vector<double>& grid, const Config& cfg = {});

/// Full solve: backward sweep of value functions, forward strategy
/// extraction re-optimizing at the realized wealth, exact certification of
/// the attained expected utility. Requires (NA) and an expected-utility
/// preference whose utility is bounded above and diverges at -inf.
SolveResult solve(const ScenarioTree& tree, const Preference& pref, const ClaimSpec& claim,
                  double z, const Config& cfg = {});

struct CurvePoint {
  double z = 0.0;
  double value = 0.0;
};
struct CurveResult {
  std::vector<CurvePoint> points;
  double max_jump = 0.0;  // modulus-of-continuity report
  bool nondecreasing = true;
};

/// Indirect utility sampled on a z grid (one solve per sample).
CurveResult indirect_utility_curve(const ScenarioTree& tree, const Preference& pref,
                                   const ClaimSpec& claim, std::vector<double> z_values,
                                   const Config& cfg = {});

}  // namespace ncp
