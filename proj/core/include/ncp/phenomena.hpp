#pragma once

#include <string>
#include <vector>

#include "ncp/common.hpp"
#include "ncp/discrete_law.hpp"
#include "ncp/preferences.hpp"

namespace ncp {

/// Objective sweep on the +-1 coin market for a bounded-below utility:
/// E u(phi * dS1) grows strictly in |phi|, so no maximiser exists.
struct DivergenceSweep {
  std::vector<double> phis;
  std::vector<double> values;
  bool strictly_increasing = false;
  double limit_estimate = 0.0;  // p * u(+inf) + (1-p) * u(-inf), sampled
  double sup_gap = 0.0;         // limit_estimate - best grid value
};

DivergenceSweep nonexistence_sweep(double p_up, const UtilityFunction& u,
                                   std::vector<double> phi_grid);

/// One rung of the randomness ladder: the sawtooth g_n spreads U into an
/// almost-independent second coordinate; mu_n = Law(U, g_n(U)) approaches the
/// product law at rate 1/n in rectangle distance.
struct RandomnessLadder {
  int n = 1;
  double distance = 0.0;  // max over the rectangle grid of |mu_n - ab|

  double g(double x) const;
  /// mu_n([0,a] x [0,b]), closed form
  double rectangle_prob(double a, double b) const;
};

std::vector<RandomnessLadder> weak_convergence_ladder(const std::vector<int>& n_values,
                                                      int rectangle_grid = 101);

/// Truncated one-step market with a non-trivial initial sigma-algebra:
/// dS1 = -1 on {Y = -1} and f_k(U) = 3^k + 1/2 + q_k(U) on {Y = k}, the
/// tail mass of Y folded into the top band.
struct CounterexampleMarket {
  int truncation = 4;
  std::vector<double> probs;  // P(Y=-1), P(Y=1), ..., P(Y=truncation)

  double q(int k, double x) const;  // 0.5 * cos(2 pi k x)
  double f(int k, double x) const;  // 3^k + 0.5 + q_k(x)
  double phi(int n, double x) const;  // g_n(x) + 1, valued in [1,2]
  std::pair<double, double> band(int k) const;  // payoff band for phi in [1,2]
  bool bands_disjoint() const;                  // exact integer arithmetic

  static CounterexampleMarket make(int truncation);
};

struct ClosednessProbe {
  CounterexampleMarket market;
  std::vector<std::pair<int, double>> distances;  // (n, dist(Law(phi_n dS1), nu))

  struct ResidualRow {
    std::string name;
    std::vector<double> moments;    // c_k = integral of g * q_k, per k
    std::vector<double> residuals;  // c_k - (3/2 - mean g)(3^k + 1/2)
    double max_abs = 0.0;
  };
  std::vector<ResidualRow> residuals;  // one row per dictionary candidate
  double best_max_residual = 0.0;      // min over the dictionary of max_abs
  double constant_g_distance = 0.0;    // dist(Law(1.5 * dS1), nu)
};

/// Measures how Law(phi_n dS1) approaches the limit nu = Law(Vbar dS1)
/// (Vbar uniform on [1,2], independent), and evaluates the moment residuals
/// that any nu-matching predictable strategy would have to zero out.
ClosednessProbe closedness_probe(int truncation, const std::vector<int>& n_values,
                                 int metric_grid = 200);

}  // namespace ncp
