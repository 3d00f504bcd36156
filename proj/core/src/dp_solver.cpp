#include "ncp/dp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "parallel.hpp"

namespace ncp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  const std::size_t lo = hi - 1;
  const double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return ys[lo] + t * (ys[hi] - ys[lo]);
}

struct StepOutcome {
  double value = -kInf;
  Vec coords;  // span coordinates of the maximizer
};

// prefer higher value; on a near-tie the smaller position, then lexicographic
bool better(double value, const Vec& coords, const StepOutcome& incumbent) {
  if (value > incumbent.value + 1e-12) return true;
  if (value < incumbent.value - 1e-12) return false;
  const double na = norm(coords), nb = norm(incumbent.coords);
  if (na < nb - 1e-12) return true;
  if (na > nb + 1e-12) return false;
  return lex_less(coords, incumbent.coords);
}

double golden_max(double lo, double hi, const std::function<double(double)>& f, double tol) {
  constexpr double phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 >= f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - phi * (b - a); f1 = f(x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + phi * (b - a); f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

// Maximize sum_c p_c * child_value(c, x + <coords, a_c>) over the radius-ball
// of span(D): coarse axis grid, then golden-section (rank 1) or compass
// pattern search (rank 2+) around the best coarse candidates.
StepOutcome optimize_step(const SupportGeometry& geom,
                          const std::function<double(std::size_t, double)>& child_value,
                          double x, double radius, const Config& cfg) {
  const std::size_t m = geom.probs.size();
  auto objective = [&](const Vec& c) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double w = x;
      for (std::size_t j = 0; j < c.size(); ++j) w += c[j] * geom.coords[i][j];
      s += geom.probs[i] * child_value(i, w);
    }
    return s;
  };

  const std::size_t r = geom.rank();
  StepOutcome best;
  best.coords.assign(r, 0.0);
  best.value = objective(best.coords);
  if (geom.trivial() || radius <= 0.0) return best;

  const int axis = std::max(3, cfg.coarse_axis | 1);
  const double h = 2.0 * radius / (axis - 1);

  if (r == 1) {
    std::vector<double> vals(static_cast<std::size_t>(axis));
    for (int i = 0; i < axis; ++i) vals[static_cast<std::size_t>(i)] = objective({-radius + i * h});
    // refine around the best few coarse local maxima
    std::vector<int> maxima;
    for (int i = 0; i < axis; ++i) {
      const std::size_t ui = static_cast<std::size_t>(i);
      const bool up_ok = i == 0 || vals[ui] >= vals[ui - 1];
      const bool down_ok = i == axis - 1 || vals[ui] > vals[ui + 1];
      if (up_ok && down_ok) maxima.push_back(i);
    }
    if (maxima.empty()) maxima.push_back(static_cast<int>(
        std::max_element(vals.begin(), vals.end()) - vals.begin()));
    std::sort(maxima.begin(), maxima.end(), [&vals](int a, int b) {
      return vals[static_cast<std::size_t>(a)] > vals[static_cast<std::size_t>(b)];
    });
    if (maxima.size() > 5) maxima.resize(5);
    for (int i : maxima) {
      const double c0 = -radius + i * h;
      const double lo = std::max(-radius, c0 - h), hi = std::min(radius, c0 + h);
      const double c = golden_max(lo, hi, [&](double t) { return objective({t}); }, cfg.xi_tol);
      const Vec cv{c};
      const double v = objective(cv);
      if (better(v, cv, best)) best = {v, cv};
    }
    return best;
  }

  // rank 2..3: coarse tensor grid restricted to the ball
  std::vector<std::pair<double, Vec>> seeds;
  Vec c(r, 0.0);
  std::vector<int> idx(r, 0);
  for (;;) {
    for (std::size_t j = 0; j < r; ++j) c[j] = -radius + idx[j] * h;
    if (norm(c) <= radius + 1e-12) seeds.emplace_back(objective(c), c);
    std::size_t j = 0;
    for (; j < r; ++j) {
      if (++idx[j] < axis) break;
      idx[j] = 0;
    }
    if (j == r) break;
  }
  std::sort(seeds.begin(), seeds.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  const std::size_t starts = std::min<std::size_t>(seeds.size(), 5);
  for (std::size_t s = 0; s < starts; ++s) {
    Vec cur = seeds[s].second;
    double cur_v = seeds[s].first;
    double step = h;
    while (step > cfg.xi_tol) {
      bool moved = false;
      for (std::size_t j = 0; j < r; ++j) {
        for (double sgn : {1.0, -1.0}) {
          Vec cand = cur;
          cand[j] += sgn * step;
          const double cn = norm(cand);
          if (cn > radius)
            for (auto& e : cand) e *= radius / cn;
          const double v = objective(cand);
          if (v > cur_v + 1e-15) {
            cur = cand;
            cur_v = v;
            moved = true;
          }
        }
      }
      if (!moved) step *= 0.5;
    }
    if (better(cur_v, cur, best)) best = {cur_v, cur};
  }
  return best;
}

Vec lift(const SupportGeometry& geom, const Vec& coords, std::size_t d) {
  Vec out(d, 0.0);
  for (std::size_t j = 0; j < coords.size(); ++j)
    for (std::size_t k = 0; k < d; ++k) out[k] += coords[j] * geom.basis[j][k];
  return out;
}

double max_claim_under(const ScenarioTree& tree, const ClaimSpec& claim, std::size_t node) {
  if (tree.is_leaf(node)) return claim.at(node);
  double m = -kInf;
  for (std::size_t c : tree.node(node).children)
    m = std::max(m, max_claim_under(tree, claim, c));
  return m;
}

// Grid half-widths per level: a base radius plus room for k_guess units of
// the largest increment on every step. Heuristic; off-grid queries fall back
// to the tail floor and the cap, both of which undervalue, so they never
// attract the optimizer.
std::vector<double> level_radii(const ScenarioTree& tree, const ClaimSpec& claim,
                                const Config& cfg) {
  std::vector<double> radius(static_cast<std::size_t>(tree.horizon()) + 1, 0.0);
  double r = cfg.grid_radius + claim.max_abs(tree);
  radius[0] = r;
  for (int t = 1; t <= tree.horizon(); ++t) {
    double dmax = 0.0;
    auto [first, last] = tree.level(t);
    for (std::size_t i = first; i < last; ++i) dmax = std::max(dmax, norm(tree.increment(i)));
    r += cfg.k_guess * std::max(dmax, 1e-12);
    radius[static_cast<std::size_t>(t)] = r;
  }
  return radius;
}

std::vector<double> uniform_grid(double center, double radius, int points) {
  const int n = std::max(3, points | 1);
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = center - radius + 2.0 * radius * i / (n - 1);
  return xs;
}

ValueFunction make_leaf_vf(const ScenarioTree& tree, const UtilityFunction& u,
                           const ClaimSpec& claim, std::size_t leaf,
                           const std::vector<double>& grid) {
  ValueFunction vf;
  const double b = claim.at(leaf);
  const UtilityFunction util = u;
  vf.cap = u.upper_bound;
  vf.exact = [util, b](double x) { return util(x - b); };
  vf.tail = vf.exact;
  vf.xs = grid;
  vf.ys.reserve(grid.size());
  for (double x : grid) vf.ys.push_back(vf.exact(x));
  return vf;
}

void require_eu_hypotheses(const UtilityFunction& u) {
  if (!u.bounded_above())
    throw Error(errc::hypothesis, "utility family '" + u.family + "' is not bounded above");
  if (!u.diverges_down)
    throw Error(errc::hypothesis,
                "utility family '" + u.family +
                    "' is bounded below; an optimal strategy need not exist in this regime");
}

// Everything one solve needs; owns the value functions and bound caches.
struct DpContext {
  const ScenarioTree& tree;
  const UtilityFunction& u;
  const ClaimSpec& claim;
  Config cfg;
  NAReport na;
  std::vector<SupportGeometry> geoms;
  std::vector<ValueFunction> vfs;
  std::vector<std::map<long, double>> kbounds;
  std::vector<double> radius;
  double z = 0.0;

  DpContext(const ScenarioTree& t, const UtilityFunction& util, const ClaimSpec& cl, double z0,
            const Config& c)
      : tree(t), u(util), claim(cl), cfg(c), z(z0) {
    na = pi_bounds(tree, quantitative_na(tree, cfg));
    geoms.resize(tree.size());
    vfs.resize(tree.size());
    kbounds.resize(tree.size());
    for (std::size_t i = 0; i < tree.size(); ++i)
      if (!tree.is_leaf(i)) geoms[i] = support_geometry(tree, i, cfg);
    radius = level_radii(tree, claim, cfg);
  }

  std::vector<double> grid_for_level(int t) const {
    return uniform_grid(z, radius[static_cast<std::size_t>(t)], cfg.grid_points);
  }

  double bound(std::size_t node, long n) {
    auto& cache = kbounds[node];
    if (auto it = cache.find(n); it != cache.end()) return it->second;
    const double k = strategy_bound(tree, node, vfs, na, u, claim, n, cfg);
    cache[n] = k;
    return k;
  }

  double search_radius(std::size_t node, double x) {
    const long n = static_cast<long>(std::floor(x));
    return bound(node, n) + bound(node, n + 1);
  }

  void sweep() {
    const std::vector<double> leaf_grid = grid_for_level(tree.horizon());
    for (std::size_t leaf : tree.leaves()) vfs[leaf] = make_leaf_vf(tree, u, claim, leaf, leaf_grid);

    for (int t = tree.horizon() - 1; t >= 0; --t) {
      const std::vector<double> grid = grid_for_level(t);
      auto [first, last] = tree.level(t);
      for (std::size_t i = first; i < last; ++i) {
        if (tree.is_leaf(i)) continue;
        // warm the bound cache sequentially; the parallel loop only reads
        const long n_lo = static_cast<long>(std::floor(grid.front()));
        const long n_hi = static_cast<long>(std::floor(grid.back())) + 1;
        std::vector<double> k_table(static_cast<std::size_t>(n_hi - n_lo + 1));
        for (long n = n_lo; n <= n_hi; ++n)
          k_table[static_cast<std::size_t>(n - n_lo)] = bound(i, n);

        ValueFunction vf;
        vf.cap = u.upper_bound;
        vf.xs = grid;
        vf.ys.assign(grid.size(), 0.0);
        const double shift = max_claim_under(tree, claim, i);
        const UtilityFunction util = u;
        vf.tail = [util, shift](double x) { return util(x - shift); };

        const auto& children = tree.node(i).children;
        detail::parallel_for(grid.size(), cfg.threads, [&](std::size_t gi) {
          const double x = grid[gi];
          const long n = static_cast<long>(std::floor(x));
          const double rad = k_table[static_cast<std::size_t>(n - n_lo)] +
                             k_table[static_cast<std::size_t>(n + 1 - n_lo)];
          const auto out = optimize_step(
              geoms[i], [&](std::size_t cp, double w) { return vfs[children[cp]](w); }, x, rad,
              cfg);
          vf.ys[gi] = out.value;
        });
        vfs[i] = std::move(vf);
      }
    }
  }

  // depth-exact one-step optimum: children evaluated recursively, leaves
  // through the terminal utility itself
  StepOutcome exact_step(std::size_t node, double x) {
    const double rad = search_radius(node, x);
    return optimize_step(
        geoms[node],
        [&](std::size_t cp, double w) {
          const std::size_t child = tree.node(node).children[cp];
          if (tree.is_leaf(child)) return u(w - claim.at(child));
          return exact_step(child, w).value;
        },
        x, rad, cfg);
  }

  StepOutcome grid_step(std::size_t node, double x) {
    const double rad = search_radius(node, x);
    const auto& children = tree.node(node).children;
    return optimize_step(
        geoms[node], [&](std::size_t cp, double w) { return vfs[children[cp]](w); }, x, rad, cfg);
  }
};

}  // namespace

double ValueFunction::operator()(double x) const {
  if (exact) return exact(x);
  if (xs.empty()) throw Error(errc::input, "value function has no grid");
  if (x <= xs.front()) {
    const double floor_v = tail ? tail(x) : ys.front();
    return std::min(ys.front(), floor_v);
  }
  if (x >= xs.back()) return ys.back();
  return interp(xs, ys, x);
}

std::vector<ValueFunction> terminal_value(const ScenarioTree& tree, const UtilityFunction& u,
                                          const ClaimSpec& claim, const Config& cfg) {
  require_eu_hypotheses(u);
  const std::vector<double> radii = level_radii(tree, claim, cfg);
  const std::vector<double> grid = uniform_grid(0.0, radii.back(), cfg.grid_points);
  std::vector<ValueFunction> out(tree.size());
  for (std::size_t leaf : tree.leaves()) out[leaf] = make_leaf_vf(tree, u, claim, leaf, grid);
  return out;
}

double lower_envelope(const ScenarioTree& tree, const UtilityFunction& u, const ClaimSpec& claim,
                      std::size_t node, double n) {
  if (tree.is_leaf(node)) return u(n - claim.at(node));
  double s = 0.0;
  for (std::size_t c : tree.node(node).children)
    s += tree.node(c).prob * lower_envelope(tree, u, claim, c, n);
  return s;
}

double strategy_bound(const ScenarioTree& tree, std::size_t node,
                      const std::vector<ValueFunction>& value_next, const NAReport& na,
                      const UtilityFunction& u, const ClaimSpec& claim, long n,
                      const Config& cfg) {
  const NAReport::PerNode* entry = na.find(node);
  if (!entry)
    throw Error(errc::input, "no quantitative NA entry for node '" + tree.node(node).id + "'");
  if (!entry->beta) return 0.0;  // trivial span: only the zero position invests

  const double beta = *entry->beta;
  const double kappa = *entry->kappa;
  const double m = lower_envelope(tree, u, claim, node, static_cast<double>(n));
  if (!std::isfinite(m))
    throw Error(errc::numeric, "lower envelope diverges at node '" + tree.node(node).id + "'");
  const double L = 2.0 * (u.upper_bound - m) / kappa;

  // per child: smallest g with V_child(-g) <= -L, by monotone bisection over
  // the range where the value function is trusted (the grid, or everywhere
  // for exact leaves)
  struct Hit {
    double g;
    double p;
  };
  std::vector<Hit> hits;
  double reachable = 0.0;
  for (std::size_t c : tree.node(node).children) {
    const ValueFunction& vf = value_next[c];
    auto h = [&vf](double g) { return vf(-g); };
    const double g_cap = vf.exact ? cfg.bound_search_cap : -vf.xs.front();
    if (h(g_cap) > -L) continue;  // threshold not reachable for this child
    double hi = std::min(1.0, g_cap);
    double lo = 0.0;
    if (h(hi) <= -L) {
      lo = hi - 1.0;
      double step = 1.0;
      while (h(lo) <= -L && lo > -cfg.bound_search_cap) {
        hi = lo;
        lo -= step;
        step *= 2.0;
      }
      if (h(lo) <= -L)
        throw Error(errc::numeric, "value function sits below the bound threshold everywhere at node '" +
                                       tree.node(c).id + "'");
    } else {
      while (h(hi) > -L) {
        lo = hi;
        hi = std::min(hi * 2.0, g_cap);
      }
    }
    for (int it = 0; it < 200 && hi - lo > 1e-10 * std::max(1.0, std::abs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (h(mid) <= -L) hi = mid;
      else lo = mid;
    }
    hits.push_back({hi, tree.node(c).prob});
    reachable += tree.node(c).prob;
  }

  const double need = 1.0 - kappa / 2.0;
  if (reachable + 1e-12 < need)
    throw Error(errc::numeric,
                "wealth grid too narrow to locate the strategy-bound threshold at node '" +
                    tree.node(node).id + "'; extend grid_radius");
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.g < b.g; });
  double mass = 0.0;
  double g_threshold = hits.back().g;
  for (const Hit& hit : hits) {
    mass += hit.p;
    if (mass + 1e-12 >= need) {
      g_threshold = hit.g;
      break;
    }
  }

  const double k = (g_threshold + static_cast<double>(n) + 1.0) / beta;
  return std::max(0.0, k) * cfg.k_multiplier;
}

OneStepResult one_step_value(const ScenarioTree& tree, std::size_t node,
                             const std::vector<ValueFunction>& value_next, const NAReport& na,
                             const UtilityFunction& u, const ClaimSpec& claim,
                             const std::vector<double>& grid, const Config& cfg) {
  const SupportGeometry geom = support_geometry(tree, node, cfg);
  OneStepResult out;
  out.vf.cap = u.upper_bound;
  out.vf.xs = grid;
  out.vf.ys.assign(grid.size(), 0.0);
  out.optimizers.assign(grid.size(), Vec(static_cast<std::size_t>(tree.assets()), 0.0));
  const double shift = max_claim_under(tree, claim, node);
  const UtilityFunction util = u;
  out.vf.tail = [util, shift](double x) { return util(x - shift); };

  std::map<long, double> cache;
  auto bound_at = [&](long n) {
    if (auto it = cache.find(n); it != cache.end()) return it->second;
    const double k = strategy_bound(tree, node, value_next, na, u, claim, n, cfg);
    cache[n] = k;
    return k;
  };

  const auto& children = tree.node(node).children;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const double x = grid[gi];
    const long n = static_cast<long>(std::floor(x));
    const double rad = bound_at(n) + bound_at(n + 1);
    const auto step = optimize_step(
        geom, [&](std::size_t cp, double w) { return value_next[children[cp]](w); }, x, rad, cfg);
    out.vf.ys[gi] = step.value;
    out.optimizers[gi] = lift(geom, step.coords, static_cast<std::size_t>(tree.assets()));
  }
  return out;
}

SolveResult solve(const ScenarioTree& tree, const Preference& pref, const ClaimSpec& claim,
                  double z, const Config& cfg) {
  if (pref.kind != Preference::Kind::eu)
    throw Error(errc::input,
                "solve requires an expected-utility preference; use the CPT optimizer instead");
  const UtilityFunction& u = pref.utility;
  require_eu_hypotheses(u);
  for (std::size_t leaf : tree.leaves())
    if (!std::isfinite(claim.at(leaf)))
      throw Error(errc::input, "claim is not finite at leaf '" + tree.node(leaf).id + "'");

  DpContext ctx(tree, u, claim, z, cfg);
  ctx.sweep();

  SolveResult res;
  res.z = z;
  res.diagnostics.exact_extraction = tree.horizon() <= cfg.exact_horizon;
  res.diagnostics.grid_value = ctx.vfs[tree.root()](z);
  for (int t = 0; t <= tree.horizon(); ++t)
    res.diagnostics.grid_sizes.push_back(ctx.grid_for_level(t).size());

  // forward extraction, re-optimizing at the realized wealth of every node
  res.strategy = Strategy(tree.size());
  std::vector<double> wealth(tree.size(), 0.0);
  std::vector<double> node_value(tree.size(), 0.0);
  wealth[tree.root()] = z;
  for (std::size_t i = 0; i < tree.size(); ++i) {
    if (tree.is_leaf(i)) {
      node_value[i] = u(wealth[i] - claim.at(i));
      continue;
    }
    const StepOutcome step = res.diagnostics.exact_extraction ? ctx.exact_step(i, wealth[i])
                                                              : ctx.grid_step(i, wealth[i]);
    node_value[i] = step.value;
    const Vec phi = lift(ctx.geoms[i], step.coords, static_cast<std::size_t>(tree.assets()));
    res.strategy.set(i, phi);
    for (std::size_t c : tree.node(i).children)
      wealth[c] = wealth[i] + dot(phi, tree.increment(c));
  }

  res.value =
      res.diagnostics.exact_extraction ? node_value[tree.root()] : res.diagnostics.grid_value;

  double attained = 0.0;
  for (std::size_t leaf : tree.leaves())
    attained += tree.unconditional_prob(leaf) * node_value[leaf];
  res.diagnostics.attained = attained;

  double gap = 0.0;
  for (int t = 0; t <= tree.horizon(); ++t) {
    auto [first, last] = tree.level(t);
    double level_value = 0.0;
    for (std::size_t i = first; i < last; ++i)
      level_value += tree.unconditional_prob(i) * node_value[i];
    gap = std::max(gap, std::abs(level_value - res.value));
  }
  res.diagnostics.consistency_gap = gap;
  res.diagnostics.refinement_delta = std::abs(res.diagnostics.grid_value - res.value);
  res.diagnostics.certified = attained >= res.value - cfg.tol_solve;
  if (res.diagnostics.exact_extraction && !res.diagnostics.certified)
    throw Error(errc::numeric,
                "value certification failed: the attained expected utility fell below the "
                "reported optimum beyond tol_solve");

  res.value_functions = std::move(ctx.vfs);
  res.strategy_bounds = std::move(ctx.kbounds);
  return res;
}

CurveResult indirect_utility_curve(const ScenarioTree& tree, const Preference& pref,
                                   const ClaimSpec& claim, std::vector<double> z_values,
                                   const Config& cfg) {
  std::sort(z_values.begin(), z_values.end());
  CurveResult out;
  for (double z : z_values) {
    const SolveResult r = solve(tree, pref, claim, z, cfg);
    out.points.push_back({z, r.value});
  }
  for (std::size_t i = 1; i < out.points.size(); ++i) {
    const double jump = out.points[i].value - out.points[i - 1].value;
    out.max_jump = std::max(out.max_jump, std::abs(jump));
    if (jump < -1e-9) out.nondecreasing = false;
  }
  return out;
}

}  // namespace ncp
