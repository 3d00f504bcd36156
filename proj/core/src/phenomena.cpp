#include "ncp/phenomena.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <utility>

namespace ncp {

namespace {

double sawtooth(int n, double x) {
  if (x >= 1.0) return 1.0;
  const double k = std::floor(n * x);
  return n * x - k;
}

// composite Simpson on [0,1]; integrands here are smooth trig polynomials
double simpson01(const std::function<double(double)>& f, int intervals = 4000) {
  const int n = intervals % 2 == 0 ? intervals : intervals + 1;
  const double h = 1.0 / n;
  double s = f(0.0) + f(1.0);
  for (int i = 1; i < n; ++i) s += f(i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

DivergenceSweep nonexistence_sweep(double p_up, const UtilityFunction& u,
                                   std::vector<double> phi_grid) {
  if (u.diverges_down)
    throw Error(errc::hypothesis,
                "the non-existence sweep demonstrates bounded-below utilities; '" + u.family +
                    "' diverges at -inf");
  if (!(p_up > 0.0 && p_up < 1.0)) throw Error(errc::input, "p_up must lie in (0,1)");
  std::sort(phi_grid.begin(), phi_grid.end());
  if (phi_grid.size() < 2) throw Error(errc::input, "phi grid needs at least two points");

  DivergenceSweep out;
  out.phis = std::move(phi_grid);
  out.values.reserve(out.phis.size());
  for (double phi : out.phis) out.values.push_back(p_up * u(phi) + (1.0 - p_up) * u(-phi));

  out.strictly_increasing = true;
  for (std::size_t i = 1; i < out.values.size(); ++i)
    if (!(out.values[i] > out.values[i - 1])) out.strictly_increasing = false;

  const double big = 1e8;
  out.limit_estimate = p_up * u(big) + (1.0 - p_up) * u(-big);
  out.sup_gap = out.limit_estimate - *std::max_element(out.values.begin(), out.values.end());
  return out;
}

double RandomnessLadder::g(double x) const { return sawtooth(n, x); }

double RandomnessLadder::rectangle_prob(double a, double b) const {
  a = std::clamp(a, 0.0, 1.0);
  b = std::clamp(b, 0.0, 1.0);
  const double l = std::floor(n * a);
  return l * b / n + std::max(0.0, std::min(a - l / static_cast<double>(n),
                                            b / static_cast<double>(n)));
}

std::vector<RandomnessLadder> weak_convergence_ladder(const std::vector<int>& n_values,
                                                      int rectangle_grid) {
  if (rectangle_grid < 2) throw Error(errc::input, "rectangle grid needs at least 2 points");
  std::vector<RandomnessLadder> out;
  for (int n : n_values) {
    if (n < 1) throw Error(errc::input, "ladder index n must be >= 1");
    RandomnessLadder rung;
    rung.n = n;
    double dist = 0.0;
    for (int i = 0; i < rectangle_grid; ++i) {
      const double a = static_cast<double>(i) / (rectangle_grid - 1);
      for (int j = 0; j < rectangle_grid; ++j) {
        const double b = static_cast<double>(j) / (rectangle_grid - 1);
        dist = std::max(dist, std::abs(rung.rectangle_prob(a, b) - a * b));
      }
    }
    rung.distance = dist;
    out.push_back(rung);
  }
  return out;
}

CounterexampleMarket CounterexampleMarket::make(int truncation) {
  if (truncation < 1) throw Error(errc::input, "truncation must be >= 1");
  if (truncation > 30) throw Error(errc::input, "truncation beyond 30 overflows the bands");
  CounterexampleMarket m;
  m.truncation = truncation;
  m.probs.push_back(0.5);  // Y = -1
  for (int k = 1; k < truncation; ++k) m.probs.push_back(std::pow(2.0, -(k + 1)));
  m.probs.push_back(std::pow(2.0, -truncation));  // Y = truncation takes the tail mass
  return m;
}

double CounterexampleMarket::q(int k, double x) const {
  return 0.5 * std::cos(2.0 * std::numbers::pi * k * x);
}

double CounterexampleMarket::f(int k, double x) const {
  return std::pow(3.0, k) + 0.5 + q(k, x);
}

double CounterexampleMarket::phi(int n, double x) const { return sawtooth(n, x) + 1.0; }

std::pair<double, double> CounterexampleMarket::band(int k) const {
  const double p = std::pow(3.0, k);
  return {p, 2.0 * p + 2.0};
}

bool CounterexampleMarket::bands_disjoint() const {
  std::int64_t power = 3;
  for (int k = 1; k < truncation; ++k) {
    if (!(2 * power + 2 < 3 * power)) return false;  // band k must end below band k+1
    power *= 3;
  }
  return true;
}

ClosednessProbe closedness_probe(int truncation, const std::vector<int>& n_values,
                                 int metric_grid) {
  ClosednessProbe out;
  out.market = CounterexampleMarket::make(truncation);
  const CounterexampleMarket& m = out.market;

  // Law(phi(U) * dS1) for a pointwise strategy phi(U): pushforward on a fine
  // midpoint partition of [0,1], returned as a sorted weighted sample table
  const int part = 8192;
  auto pushforward = [&](const std::function<double(double)>& phi_fn) {
    std::vector<std::pair<double, double>> vals;  // (value, weight)
    vals.reserve(static_cast<std::size_t>(m.truncation + 1) * part);
    for (int j = 0; j < part; ++j) {
      const double u = (j + 0.5) / part;
      const double p = phi_fn(u);
      vals.emplace_back(-p, m.probs[0] / part);
      for (int k = 1; k <= m.truncation; ++k)
        vals.emplace_back(p * m.f(k, u), m.probs[static_cast<std::size_t>(k)] / part);
    }
    std::sort(vals.begin(), vals.end());
    // turn weights into a cumulative table
    double acc = 0.0;
    for (auto& v : vals) {
      acc += v.second;
      v.second = acc;
    }
    return vals;
  };
  auto table_cdf = [](const std::vector<std::pair<double, double>>& table, double x) {
    const auto it = std::upper_bound(table.begin(), table.end(), std::pair{x, 2.0});
    return it == table.begin() ? 0.0 : std::prev(it)->second;
  };

  // CDF of nu = Law(Vbar * dS1), Vbar uniform on [1,2] independent of (U,Y)
  const int vpart = 4096;
  auto cdf_limit = [&](double x) {
    double acc = 0.0;
    {
      // -Vbar is uniform on [-2,-1]
      const double p = std::clamp(x + 2.0, 0.0, 1.0);
      acc += m.probs[0] * p;
    }
    for (int k = 1; k <= m.truncation; ++k) {
      double mass = 0.0;
      for (int j = 0; j < vpart; ++j) {
        const double u = (j + 0.5) / vpart;
        mass += std::clamp(x / m.f(k, u) - 1.0, 0.0, 1.0);
      }
      acc += m.probs[static_cast<std::size_t>(k)] * mass / vpart;
    }
    return acc;
  };

  // fixed evaluation grid: points across the negative band and every payoff band
  std::vector<double> grid_pts;
  for (int i = 0; i < metric_grid; ++i)
    grid_pts.push_back(-2.2 + (i + 0.5) * (1.4 / metric_grid));
  for (int k = 1; k <= m.truncation; ++k) {
    const auto [lo, hi] = m.band(k);
    for (int i = 0; i < metric_grid; ++i)
      grid_pts.push_back(lo - 0.5 + (i + 0.5) * ((hi - lo + 1.0) / metric_grid));
  }

  std::vector<double> limit_cdf(grid_pts.size());
  for (std::size_t i = 0; i < grid_pts.size(); ++i) limit_cdf[i] = cdf_limit(grid_pts[i]);

  auto law_distance = [&](const std::function<double(double)>& phi_fn) {
    const auto table = pushforward(phi_fn);
    double dist = 0.0;
    for (std::size_t i = 0; i < grid_pts.size(); ++i)
      dist = std::max(dist, std::abs(table_cdf(table, grid_pts[i]) - limit_cdf[i]));
    return dist;
  };

  for (int n : n_values) {
    if (n < 1) throw Error(errc::input, "sequence index n must be >= 1");
    out.distances.emplace_back(n, law_distance([&](double u) { return m.phi(n, u); }));
  }

  // moment residuals c_k(g) - (3/2 - int g) (3^k + 1/2) for a dictionary of
  // candidate predictable strategies
  struct Candidate {
    std::string name;
    std::function<double(double)> g;
  };
  std::vector<Candidate> dict;
  dict.push_back({"g=1", [](double) { return 1.0; }});
  dict.push_back({"g=3/2", [](double) { return 1.5; }});
  dict.push_back({"g=2", [](double) { return 2.0; }});
  for (int j = 1; j <= std::min(truncation, 3); ++j) {
    dict.push_back({"g=3/2+0.5*q" + std::to_string(j),
                    [&m, j](double x) { return 1.5 + 0.5 * m.q(j, x); }});
    dict.push_back({"g=3/2-0.5*q" + std::to_string(j),
                    [&m, j](double x) { return 1.5 - 0.5 * m.q(j, x); }});
  }
  dict.push_back({"g=3/2+0.1*q1", [&m](double x) { return 1.5 + 0.1 * m.q(1, x); }});

  out.best_max_residual = std::numeric_limits<double>::infinity();
  for (const auto& cand : dict) {
    ClosednessProbe::ResidualRow row;
    row.name = cand.name;
    const double mean = simpson01(cand.g);
    for (int k = 1; k <= truncation; ++k) {
      const double ck = simpson01([&](double x) { return cand.g(x) * m.q(k, x); });
      const double res = ck - (1.5 - mean) * (std::pow(3.0, k) + 0.5);
      row.moments.push_back(ck);
      row.residuals.push_back(res);
      row.max_abs = std::max(row.max_abs, std::abs(res));
    }
    out.best_max_residual = std::min(out.best_max_residual, row.max_abs);
    out.residuals.push_back(std::move(row));
  }

  out.constant_g_distance = law_distance([](double) { return 1.5; });
  return out;
}

}  // namespace ncp
