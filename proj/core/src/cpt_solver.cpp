#include "ncp/cpt_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace ncp {

namespace {

// survival-sorted exact Choquet integral of u applied to `part` of each atom
double choquet_part(const DiscreteLaw& law, const UtilityFunction& u,
                    const DistortionFunction& w, bool positive_part) {
  std::vector<std::pair<double, double>> levels;  // (u-level, prob)
  levels.reserve(law.atoms.size());
  for (const auto& a : law.atoms) {
    const double part = positive_part ? std::max(a.value, 0.0) : std::max(-a.value, 0.0);
    levels.emplace_back(u(part), a.prob);
  }
  std::sort(levels.begin(), levels.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  double total = 0.0;
  double tail_prob = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    tail_prob += levels[i].second;
    // merge equal levels before charging the strip
    if (i + 1 < levels.size() && levels[i + 1].first == levels[i].first) continue;
    const double next = i + 1 < levels.size() ? levels[i + 1].first : 0.0;
    const double strip = levels[i].first - std::max(next, 0.0);
    if (strip <= 0.0) break;  // remaining levels are <= 0
    total += strip * w(tail_prob);
  }
  return total;
}

double u_minus_inverse(const UtilityFunction& u_minus, double y, const Config& cfg) {
  // smallest x >= 0 with u_minus(x) >= y
  double hi = 1.0;
  while (u_minus(hi) < y) {
    hi *= 2.0;
    if (hi > cfg.bound_search_cap)
      throw Error(errc::numeric, "loss utility failed to reach the required level");
  }
  double lo = 0.0;
  for (int i = 0; i < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (u_minus(mid) >= y) hi = mid;
    else lo = mid;
  }
  return hi;
}

struct CoordLayout {
  // nodes carrying free coordinates, with their geometry and region radius
  struct Block {
    std::size_t node;
    SupportGeometry geom;
    double radius;
    std::size_t offset;  // first coordinate index
  };
  std::vector<Block> blocks;
  std::size_t dims = 0;
};

Strategy to_strategy(const ScenarioTree& tree, const CoordLayout& layout, const Vec& coords) {
  Strategy s = Strategy::zero(tree);
  const std::size_t d = static_cast<std::size_t>(tree.assets());
  for (const auto& b : layout.blocks) {
    Vec phi(d, 0.0);
    for (std::size_t j = 0; j < b.geom.rank(); ++j)
      for (std::size_t k = 0; k < d; ++k) phi[k] += coords[b.offset + j] * b.geom.basis[j][k];
    s.set(b.node, phi);
  }
  return s;
}

// clip every node block into its region ball
void project_to_region(const CoordLayout& layout, Vec& coords) {
  for (const auto& b : layout.blocks) {
    double n2 = 0.0;
    for (std::size_t j = 0; j < b.geom.rank(); ++j)
      n2 += coords[b.offset + j] * coords[b.offset + j];
    const double n = std::sqrt(n2);
    if (n > b.radius)
      for (std::size_t j = 0; j < b.geom.rank(); ++j) coords[b.offset + j] *= b.radius / n;
  }
}

}  // namespace

double choquet_plus(const DiscreteLaw& law, const UtilityFunction& u_plus,
                    const DistortionFunction& w_plus) {
  return choquet_part(law, u_plus, w_plus, true);
}

double choquet_minus(const DiscreteLaw& law, const UtilityFunction& u_minus,
                     const DistortionFunction& w_minus) {
  return choquet_part(law, u_minus, w_minus, false);
}

ChoquetValue cpt_value(const ScenarioTree& tree, const CPTPreference& pref,
                       const ClaimSpec& claim, const Strategy& strategy, double z,
                       const Config& cfg) {
  const DiscreteLaw law = terminal_law(tree, strategy, z, claim, cfg);
  ChoquetValue out;
  out.v_plus = choquet_plus(law, pref.u_plus, pref.w_plus);
  out.v_minus = choquet_minus(law, pref.u_minus, pref.w_minus);
  out.v = out.v_plus - out.v_minus;
  return out;
}

SearchRegion search_region(const ScenarioTree& tree, const CPTPreference& pref,
                           const ClaimSpec& claim, double z, const NAReport& na, double c,
                           const Config& cfg) {
  bool diverges = true;
  for (int k = 2; k <= 6; ++k)
    if (!(pref.u_minus(std::pow(10.0, k)) >= static_cast<double>(k))) diverges = false;
  if (!diverges)
    throw Error(errc::hypothesis,
                "loss utility does not diverge; no finite search region exists");
  if (!na.na) throw Error(errc::arbitrage, "search region requires (NA)");

  const double cap = pref.u_plus.upper_bound;
  const double target = cap - c + 1.0;
  const double max_b = claim.max_abs(tree);

  SearchRegion region;
  region.floor_value = c;

  // per-level worst radius and increment, for the worst-case wealth offsets
  std::vector<double> level_radius(static_cast<std::size_t>(tree.horizon()) + 1, 0.0);
  std::vector<double> level_dmax(static_cast<std::size_t>(tree.horizon()) + 1, 0.0);
  for (int t = 1; t <= tree.horizon(); ++t) {
    auto [first, last] = tree.level(t);
    for (std::size_t i = first; i < last; ++i)
      level_dmax[static_cast<std::size_t>(t)] =
          std::max(level_dmax[static_cast<std::size_t>(t)], norm(tree.increment(i)));
  }

  for (std::size_t i = 0; i < tree.size(); ++i) {
    if (tree.is_leaf(i)) continue;
    const int t = tree.node(i).time;
    const NAReport::PerNode* entry = na.find(i);
    if (!entry) throw Error(errc::input, "NA report misses node '" + tree.node(i).id + "'");
    if (!entry->beta) {
      region.radius[i] = 0.0;  // trivial span, positions are pinned to zero
      continue;
    }
    if (!entry->pi)
      throw Error(errc::input, "NA report carries no pi bound at node '" + tree.node(i).id + "'");

    // worst-case wealth accumulated inside the region before this node
    double offset = std::abs(z) + max_b;
    for (int s = 1; s <= t; ++s)
      offset += level_radius[static_cast<std::size_t>(s - 1)] *
                level_dmax[static_cast<std::size_t>(s)];

    const double loss_rate = std::min(*entry->beta, *entry->kappa);
    const double mass = tree.unconditional_prob(i) * (*entry->pi);
    const double weight = pref.w_minus(mass);
    if (!(weight > 0.0))
      throw Error(errc::numeric, "distorted tail mass vanished at node '" + tree.node(i).id +
                                     "'; cannot certify a region");
    const double level_needed = target / weight;
    const double r = (offset + u_minus_inverse(pref.u_minus, level_needed, cfg)) / loss_rate;
    region.radius[i] = r;
    auto& lvl = level_radius[static_cast<std::size_t>(t)];
    lvl = std::max(lvl, r);
  }
  return region;
}

CPTResult optimize_cpt(const ScenarioTree& tree, const CPTPreference& pref,
                       const ClaimSpec& claim, double z, const Config& cfg) {
  const PreferenceCheck check = check_cpt(pref);
  if (!check.ok) throw Error(errc::hypothesis, "CPT preference invalid: " + check.issues.front());

  const NAReport na = pi_bounds(tree, quantitative_na(tree, cfg));

  const Strategy zero = Strategy::zero(tree);
  const double c = cpt_value(tree, pref, claim, zero, z, cfg).v;
  const SearchRegion region = search_region(tree, pref, claim, z, na, c, cfg);

  CoordLayout layout;
  for (std::size_t i = 0; i < tree.size(); ++i) {
    if (tree.is_leaf(i)) continue;
    SupportGeometry g = support_geometry(tree, i, cfg);
    const double r = region.radius.at(i);
    if (g.trivial() || r <= 0.0) continue;
    CoordLayout::Block b{i, std::move(g), r, layout.dims};
    layout.dims += b.geom.rank();
    layout.blocks.push_back(std::move(b));
  }

  CPTResult res;
  res.region = region;
  if (layout.dims == 0) {
    res.strategy = zero;
    res.value = cpt_value(tree, pref, claim, zero, z, cfg);
    return res;
  }

  long evals = 0;
  auto objective = [&](const Vec& coords) {
    ++evals;
    return cpt_value(tree, pref, claim, to_strategy(tree, layout, coords), z, cfg).v;
  };

  // smaller objective never wins; near-ties prefer the smaller strategy
  Vec best_coords(layout.dims, 0.0);
  double best_value = objective(best_coords);
  auto consider = [&](const Vec& coords, double value) {
    if (value > best_value + 1e-12 ||
        (value > best_value - 1e-12 &&
         (norm(coords) < norm(best_coords) - 1e-12 ||
          (norm(coords) < norm(best_coords) + 1e-12 && lex_less(coords, best_coords))))) {
      best_value = value;
      best_coords = coords;
    }
  };

  // seeds: tensor grid when affordable, otherwise axis probes plus seeded draws
  std::vector<Vec> seeds;
  const int axis = std::max(3, cfg.cpt_coarse_axis | 1);
  double tensor_size = 1.0;
  for (std::size_t j = 0; j < layout.dims; ++j) {
    tensor_size *= axis;
    if (tensor_size > static_cast<double>(cfg.cpt_tensor_budget)) break;
  }
  if (tensor_size <= static_cast<double>(cfg.cpt_tensor_budget)) {
    std::vector<int> idx(layout.dims, 0);
    for (;;) {
      Vec c0(layout.dims);
      for (const auto& b : layout.blocks)
        for (std::size_t j = 0; j < b.geom.rank(); ++j)
          c0[b.offset + j] = -b.radius + 2.0 * b.radius * idx[b.offset + j] / (axis - 1);
      project_to_region(layout, c0);
      seeds.push_back(std::move(c0));
      std::size_t j = 0;
      for (; j < layout.dims; ++j) {
        if (++idx[j] < axis) break;
        idx[j] = 0;
      }
      if (j == layout.dims) break;
    }
  } else {
    seeds.emplace_back(layout.dims, 0.0);
    for (const auto& b : layout.blocks) {
      for (std::size_t j = 0; j < b.geom.rank(); ++j) {
        for (double f : {1.0, -1.0, 0.5, -0.5}) {
          Vec c0(layout.dims, 0.0);
          c0[b.offset + j] = f * b.radius;
          seeds.push_back(std::move(c0));
        }
      }
    }
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int s = 0; s < cfg.cpt_starts; ++s) {
      Vec c0(layout.dims);
      for (const auto& b : layout.blocks)
        for (std::size_t j = 0; j < b.geom.rank(); ++j)
          c0[b.offset + j] = unit(rng) * b.radius;
      project_to_region(layout, c0);
      seeds.push_back(std::move(c0));
    }
  }

  std::vector<std::pair<double, Vec>> scored;
  scored.reserve(seeds.size());
  for (auto& s : seeds) {
    const double v = objective(s);
    consider(s, v);
    scored.emplace_back(v, std::move(s));
  }
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  bool converged = true;
  const std::size_t starts = std::min<std::size_t>(scored.size(), 8);
  double max_radius = 0.0;
  for (const auto& b : layout.blocks) max_radius = std::max(max_radius, b.radius);

  for (std::size_t s = 0; s < starts; ++s) {
    Vec cur = scored[s].second;
    double cur_v = scored[s].first;
    double step = 2.0 * max_radius / (axis - 1);
    while (step > cfg.cpt_step_tol) {
      if (evals > cfg.cpt_eval_budget) {
        converged = false;
        break;
      }
      bool moved = false;
      for (std::size_t j = 0; j < layout.dims; ++j) {
        for (double sgn : {1.0, -1.0}) {
          Vec cand = cur;
          cand[j] += sgn * step;
          project_to_region(layout, cand);
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
    consider(cur, cur_v);
    if (!converged) break;
  }

  res.converged = converged;
  res.strategy = to_strategy(tree, layout, best_coords);
  res.value = cpt_value(tree, pref, claim, res.strategy, z, cfg);
  return res;
}

}  // namespace ncp
