#include "ncp/no_arbitrage.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "simplex.hpp"

namespace ncp {

namespace {

double golden_min(double lo, double hi, const std::function<double(double)>& f, double tol) {
  constexpr double phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - phi * (b - a); f1 = f(x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + phi * (b - a); f2 = f(x2);
    }
  }
  return f(0.5 * (a + b));
}

// worst guaranteed one-step loss of the unit direction `dir` (span coords)
double direction_loss(const SupportGeometry& g, const Vec& dir) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const Vec& c : g.coords) worst = std::max(worst, -dot(dir, c));
  return worst;
}

// min over unit directions of direction_loss, i.e. the certified beta
double scan_beta(const SupportGeometry& g, const Config& cfg) {
  const std::size_t r = g.rank();
  if (r == 1) {
    // exact two-sided scan
    double amin = std::numeric_limits<double>::infinity();
    double amax = -amin;
    for (const Vec& c : g.coords) {
      amin = std::min(amin, c[0]);
      amax = std::max(amax, c[0]);
    }
    return std::min(amax, -amin);
  }
  if (r == 2) {
    auto loss_at = [&g](double theta) {
      return direction_loss(g, {std::cos(theta), std::sin(theta)});
    };
    const int n = cfg.beta_directions;
    double best = std::numeric_limits<double>::infinity();
    double best_theta = 0.0;
    for (int i = 0; i < n; ++i) {
      const double theta = 2.0 * std::numbers::pi * i / n;
      const double v = loss_at(theta);
      if (v < best) { best = v; best_theta = theta; }
    }
    const double h = 2.0 * std::numbers::pi / n;
    const double refined = golden_min(best_theta - h, best_theta + h, loss_at, 1e-10);
    return cfg.beta_shrink * std::min(best, refined);
  }
  if (r == 3) {
    // Fibonacci sphere scan plus local pattern refinement on the tangent plane
    const int n = cfg.beta_directions;
    const double ga = std::numbers::pi * (3.0 - std::sqrt(5.0));
    Vec best_dir{0, 0, 1};
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      const double y = 1.0 - 2.0 * (i + 0.5) / n;
      const double rad = std::sqrt(std::max(0.0, 1.0 - y * y));
      const double th = ga * i;
      Vec dir{rad * std::cos(th), y, rad * std::sin(th)};
      const double v = direction_loss(g, dir);
      if (v < best) { best = v; best_dir = dir; }
    }
    // orthonormal tangent frame at best_dir
    Vec t1 = std::abs(best_dir[0]) < 0.9 ? Vec{1, 0, 0} : Vec{0, 1, 0};
    const double d1 = dot(t1, best_dir);
    for (int j = 0; j < 3; ++j) t1[j] -= d1 * best_dir[j];
    const double n1 = norm(t1);
    for (int j = 0; j < 3; ++j) t1[j] /= n1;
    Vec t2{best_dir[1] * t1[2] - best_dir[2] * t1[1],
           best_dir[2] * t1[0] - best_dir[0] * t1[2],
           best_dir[0] * t1[1] - best_dir[1] * t1[0]};
    double step = 2.0 / std::sqrt(static_cast<double>(n));
    Vec center = best_dir;
    while (step > 1e-9) {
      bool moved = false;
      for (const auto& [ds, dt] : {std::pair{step, 0.0}, {-step, 0.0}, {0.0, step}, {0.0, -step}}) {
        Vec cand(3);
        for (int j = 0; j < 3; ++j) cand[j] = center[j] + ds * t1[j] + dt * t2[j];
        const double nn = norm(cand);
        for (int j = 0; j < 3; ++j) cand[j] /= nn;
        const double v = direction_loss(g, cand);
        if (v < best) { best = v; center = cand; moved = true; }
      }
      if (!moved) step *= 0.5;
    }
    return cfg.beta_shrink * best;
  }
  throw Error(errc::input,
              "support span of rank " + std::to_string(r) + " exceeds the supported range (3)");
}

// LP-based one-step arbitrage search in span coordinates; returns a direction
// with nonnegative gain on every child and positive total gain, if one exists
std::optional<Vec> one_step_arbitrage(const SupportGeometry& g, const Config& cfg) {
  if (g.trivial()) return std::nullopt;
  const std::size_t r = g.rank();
  const std::size_t m = g.coords.size();

  // scaled coords, shift xi = y - 1 so y >= 0; constraints a.y >= a.1, y <= 2
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  Vec total(r, 0.0);
  for (const Vec& c : g.coords) {
    std::vector<double> row(r);
    double rhs = 0.0;
    for (std::size_t j = 0; j < r; ++j) {
      const double a = c[j] / g.scale;
      row[j] = -a;
      rhs -= a;
      total[j] += a;
    }
    A.push_back(std::move(row));
    b.push_back(rhs);
  }
  for (std::size_t j = 0; j < r; ++j) {
    std::vector<double> row(r, 0.0);
    row[j] = 1.0;
    A.push_back(std::move(row));
    b.push_back(2.0);
  }

  const auto lp = detail::solve_lp(A, b, total);
  if (lp.status != detail::LPResult::Status::optimal)
    throw Error(errc::numeric, "arbitrage LP did not reach an optimum");
  double gain = 0.0;
  for (std::size_t j = 0; j < r; ++j) gain += total[j] * (lp.x[j] - 1.0);
  if (gain <= cfg.arbitrage_tol * static_cast<double>(m)) return std::nullopt;

  Vec xi(r);
  for (std::size_t j = 0; j < r; ++j) xi[j] = lp.x[j] - 1.0;
  return xi;
}

}  // namespace

SupportGeometry support_geometry(const ScenarioTree& tree, std::size_t node, const Config& cfg) {
  if (tree.is_leaf(node)) throw Error(errc::input, "support_geometry called on a leaf node");
  SupportGeometry g;
  g.node = node;
  const std::size_t d = static_cast<std::size_t>(tree.assets());
  for (std::size_t c : tree.node(node).children) {
    g.increments.push_back(tree.increment(c));
    g.probs.push_back(tree.node(c).prob);
    g.scale = std::max(g.scale, norm(g.increments.back()));
  }
  if (g.scale == 0.0) return g;  // D = {0}

  Eigen::MatrixXd M(static_cast<Eigen::Index>(g.increments.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < g.increments.size(); ++i)
    for (std::size_t j = 0; j < d; ++j) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = g.increments[i][j];

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const auto& V = svd.matrixV();
  for (Eigen::Index j = 0; j < sv.size(); ++j) {
    if (sv(j) > cfg.rank_cutoff * g.scale) {
      Vec basis_vec(d);
      for (std::size_t k = 0; k < d; ++k) basis_vec[k] = V(static_cast<Eigen::Index>(k), j);
      g.basis.push_back(std::move(basis_vec));
    }
  }
  for (const Vec& inc : g.increments) {
    Vec c(g.basis.size());
    for (std::size_t j = 0; j < g.basis.size(); ++j) c[j] = dot(inc, g.basis[j]);
    g.coords.push_back(std::move(c));
  }
  return g;
}

Vec project_to_D(const SupportGeometry& geom, const Vec& xi) {
  Vec out(xi.size(), 0.0);
  for (const Vec& b : geom.basis) {
    const double c = dot(xi, b);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += c * b[j];
  }
  return out;
}

NAReport check_na(const ScenarioTree& tree, const Config& cfg) {
  NAReport rep;
  for (std::size_t i = 0; i < tree.size(); ++i) {
    if (tree.is_leaf(i)) continue;
    const SupportGeometry g = support_geometry(tree, i, cfg);
    NAReport::PerNode pn;
    pn.node = i;
    pn.id = tree.node(i).id;
    pn.rank = g.rank();
    rep.nodes.push_back(pn);

    if (rep.na) {
      if (auto xi = one_step_arbitrage(g, cfg)) {
        rep.na = false;
        rep.witness_node = i;
        Strategy w = Strategy::zero(tree);
        Vec lifted(static_cast<std::size_t>(tree.assets()), 0.0);
        for (std::size_t j = 0; j < g.basis.size(); ++j)
          for (std::size_t k = 0; k < lifted.size(); ++k) lifted[k] += (*xi)[j] * g.basis[j][k];
        w.set(i, lifted);
        rep.witness = std::move(w);
      }
    }
  }
  return rep;
}

NAReport quantitative_na(const ScenarioTree& tree, const Config& cfg) {
  NAReport rep = check_na(tree, cfg);
  if (!rep.na)
    throw Error(errc::arbitrage, "quantitative bounds require (NA); the market has an arbitrage at node '" +
                                     tree.node(*rep.witness_node).id + "'");
  for (auto& pn : rep.nodes) {
    const SupportGeometry g = support_geometry(tree, pn.node, cfg);
    if (g.trivial()) continue;
    pn.kappa = *std::min_element(g.probs.begin(), g.probs.end());
    pn.beta = scan_beta(g, cfg);
  }
  return rep;
}

NAReport pi_bounds(const ScenarioTree& tree, NAReport report) {
  if (!report.na) throw Error(errc::arbitrage, "pi bounds require (NA)");
  for (auto& pn : report.nodes) {
    if (!pn.kappa) continue;  // trivial span: lemma does not apply
    double pi = *pn.kappa;
    // worst kappa among descendants, level by level, up to T-1
    std::vector<std::size_t> frontier = tree.node(pn.node).children;
    while (!frontier.empty()) {
      double level_min = 1.0;
      std::vector<std::size_t> next;
      bool has_inner = false;
      for (std::size_t m : frontier) {
        if (tree.is_leaf(m)) continue;
        has_inner = true;
        const NAReport::PerNode* entry = report.find(m);
        if (entry && entry->kappa) level_min = std::min(level_min, *entry->kappa);
        next.insert(next.end(), tree.node(m).children.begin(), tree.node(m).children.end());
      }
      if (has_inner) pi *= level_min;
      frontier = std::move(next);
    }
    pn.pi = pi;
  }
  return report;
}

}  // namespace ncp
