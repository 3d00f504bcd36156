#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace ncp {

using Vec = std::vector<double>;

/// Error categories; the CLI maps them onto its exit-code contract.
enum class errc {
  input,       // malformed files, bad parameters, missing entries
  arbitrage,   // operation requires (NA) but the market admits arbitrage
  hypothesis,  // a standing assumption on preferences is violated
  numeric      // grids/budgets too small to certify a result
};

class Error : public std::runtime_error {
 public:
  Error(errc kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  errc kind() const { return kind_; }

 private:
  errc kind_;
};

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec sub(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

/// Deterministic lexicographic order used for optimizer tie-breaking.
inline bool lex_less(const Vec& a, const Vec& b) {
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return a.size() < b.size();
}

/// All numeric knobs in one place. Field-by-key access backs the CLI's
/// `--tol key=val` overrides.
struct Config {
  // scenario_tree
  double atom_merge_tol = 1e-12;

  // no_arbitrage
  double rank_cutoff = 1e-9;    // relative SVD cutoff for the span basis
  int beta_directions = 10000;  // angular grid size for r in {2,3}
  double beta_shrink = 0.99;    // conservative shrink on scanned beta, r >= 2
  double arbitrage_tol = 1e-8;  // relative threshold on the LP optimum

  // dp_solver
  int grid_points = 4001;       // wealth grid points per node
  double grid_radius = 6.0;     // base half-width of the level-0 wealth grid
  double k_guess = 6.0;         // per-level grid growth, units of max |dS|
  int coarse_axis = 41;         // coarse multi-start points per span axis
  double xi_tol = 1e-8;         // position refinement tolerance
  double tol_solve = 1e-6;      // value certification tolerance
  double k_multiplier = 1.0;    // scales every strategy bound (test knob)
  int exact_horizon = 3;        // depth-exact extraction up to this horizon
  double bound_search_cap = 1e12;  // give up locating G_L beyond this wealth

  // preferences
  int bisect_iters = 80;  // distortion inverse bisection iterations

  // cpt_solver
  int cpt_coarse_axis = 21;        // tensor seed grid points per coordinate
  long cpt_tensor_budget = 200000; // max tensor seeds before falling back
  int cpt_starts = 32;             // extra multi-starts beyond the tensor seeds
  double cpt_step_tol = 1e-6;      // pattern search final step size
  long cpt_eval_budget = 2000000;  // objective evaluation budget

  unsigned long long seed = 12345;
  int threads = 1;

  void set(const std::string& key, double value);
};

}  // namespace ncp
