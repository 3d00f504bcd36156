#include "ncp/common.hpp"

#include <cmath>

namespace ncp {

void Config::set(const std::string& key, double value) {
  auto as_int = [&](int& field) { field = static_cast<int>(std::llround(value)); };
  auto as_long = [&](long& field) { field = static_cast<long>(std::llround(value)); };
  if (key == "atom_merge_tol") atom_merge_tol = value;
  else if (key == "rank_cutoff") rank_cutoff = value;
  else if (key == "beta_directions") as_int(beta_directions);
  else if (key == "beta_shrink") beta_shrink = value;
  else if (key == "arbitrage_tol") arbitrage_tol = value;
  else if (key == "grid_points") as_int(grid_points);
  else if (key == "grid_radius") grid_radius = value;
  else if (key == "k_guess") k_guess = value;
  else if (key == "coarse_axis") as_int(coarse_axis);
  else if (key == "xi_tol") xi_tol = value;
  else if (key == "tol_solve") tol_solve = value;
  else if (key == "k_multiplier") k_multiplier = value;
  else if (key == "exact_horizon") as_int(exact_horizon);
  else if (key == "bound_search_cap") bound_search_cap = value;
  else if (key == "bisect_iters") as_int(bisect_iters);
  else if (key == "cpt_coarse_axis") as_int(cpt_coarse_axis);
  else if (key == "cpt_tensor_budget") as_long(cpt_tensor_budget);
  else if (key == "cpt_starts") as_int(cpt_starts);
  else if (key == "cpt_step_tol") cpt_step_tol = value;
  else if (key == "cpt_eval_budget") as_long(cpt_eval_budget);
  else if (key == "threads") as_int(threads);
  else throw Error(errc::input, "unknown tolerance key '" + key + "'");
}

}  // namespace ncp
