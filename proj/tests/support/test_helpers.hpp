#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ncp/preferences.hpp"
#include "ncp/tree.hpp"

namespace ncptest {

/// One-period market: S_0 = 0, S_1 in {up, down} with P(up) = p_up.
inline ncp::ScenarioTree coin_tree(double p_up = 0.5, double up = 1.0, double down = -1.0) {
  std::vector<ncp::NodeSpec> specs{
      {"root", 0, std::nullopt, 1.0, {0.0}},
      {"u", 1, std::string("root"), p_up, {up}},
      {"d", 1, std::string("root"), 1.0 - p_up, {down}},
  };
  return ncp::ScenarioTree::build(1, 1, specs);
}

/// T-period i.i.d. recombining-in-law (but not in tree) market, d = 1.
inline ncp::ScenarioTree iid_tree(int T, const std::vector<double>& incs,
                                  const std::vector<double>& probs) {
  std::vector<ncp::NodeSpec> specs;
  specs.push_back({"n0", 0, std::nullopt, 1.0, {0.0}});
  struct Item {
    std::string id;
    double price;
  };
  std::vector<Item> frontier{{"n0", 0.0}};
  int counter = 1;
  for (int t = 1; t <= T; ++t) {
    std::vector<Item> next;
    for (const auto& item : frontier) {
      for (std::size_t b = 0; b < incs.size(); ++b) {
        const std::string id = "n" + std::to_string(counter++);
        const double price = item.price + incs[b];
        specs.push_back({id, t, item.id, probs[b], {price}});
        next.push_back({id, price});
      }
    }
    frontier = std::move(next);
  }
  return ncp::ScenarioTree::build(T, 1, specs);
}

/// Random d=1 tree; when force_na is set every node gets both a strictly
/// positive and a strictly negative increment, which pins 0 inside the
/// convex hull of the one-step support.
inline ncp::ScenarioTree random_tree(std::mt19937_64& rng, int T, int max_children,
                                     bool force_na) {
  std::uniform_int_distribution<int> n_children(2, max_children);
  std::uniform_real_distribution<double> inc(-2.0, 2.0);
  std::uniform_real_distribution<double> posmass(0.2, 1.0);

  std::vector<ncp::NodeSpec> specs;
  specs.push_back({"n0", 0, std::nullopt, 1.0, {0.0}});
  struct Item {
    std::string id;
    double price;
  };
  std::vector<Item> frontier{{"n0", 0.0}};
  int counter = 1;
  for (int t = 1; t <= T; ++t) {
    std::vector<Item> next;
    for (const auto& item : frontier) {
      const int m = n_children(rng);
      std::vector<double> deltas(static_cast<std::size_t>(m));
      for (auto& d : deltas) d = inc(rng);
      if (force_na) {
        deltas[0] = std::abs(deltas[0]) + 0.1;
        deltas[1] = -std::abs(deltas[1]) - 0.1;
      }
      std::vector<double> mass(static_cast<std::size_t>(m));
      double total = 0.0;
      for (auto& p : mass) {
        p = posmass(rng);
        total += p;
      }
      for (int b = 0; b < m; ++b) {
        const std::string id = "n" + std::to_string(counter++);
        const double price = item.price + deltas[static_cast<std::size_t>(b)];
        specs.push_back({id, t, item.id, mass[static_cast<std::size_t>(b)] / total, {price}});
        next.push_back({id, price});
      }
    }
    frontier = std::move(next);
  }
  return ncp::ScenarioTree::build(T, 1, specs);
}

inline std::vector<std::size_t> nonleaf_nodes(const ncp::ScenarioTree& tree) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < tree.size(); ++i)
    if (!tree.is_leaf(i)) out.push_back(i);
  return out;
}

/// Exhaustive arbitrage search over a per-node position grid (d = 1):
/// reports true when some gridded strategy has nonnegative terminal wealth
/// everywhere and a material gain somewhere.
inline bool grid_arbitrage_search(const ncp::ScenarioTree& tree, int grid_points, double radius) {
  const std::vector<std::size_t> nodes = nonleaf_nodes(tree);
  std::vector<double> grid(static_cast<std::size_t>(grid_points));
  for (int i = 0; i < grid_points; ++i)
    grid[static_cast<std::size_t>(i)] = -radius + 2.0 * radius * i / (grid_points - 1);

  std::vector<std::size_t> idx(nodes.size(), 0);
  for (;;) {
    ncp::Strategy s(tree.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) s.set(nodes[j], {grid[idx[j]]});
    const std::vector<double> wealth = ncp::wealth_process(tree, s, 0.0);
    double wmin = 0.0, wmax = 0.0;
    bool first = true;
    for (std::size_t leaf : tree.leaves()) {
      wmin = first ? wealth[leaf] : std::min(wmin, wealth[leaf]);
      wmax = first ? wealth[leaf] : std::max(wmax, wealth[leaf]);
      first = false;
    }
    if (wmin >= -1e-9 && wmax > 1e-6) return true;

    std::size_t j = 0;
    for (; j < nodes.size(); ++j) {
      if (++idx[j] < grid.size()) break;
      idx[j] = 0;
    }
    if (j == nodes.size()) break;
  }
  return false;
}

/// Independent expected-utility oracle: per-node exhaustive position grid,
/// recursing through the tree (the objective is a tree-decomposable sum, so
/// nested per-node maxima realize the full product-grid maximum).
inline double grid_eu_oracle(const ncp::ScenarioTree& tree, const ncp::UtilityFunction& u,
                             const ncp::ClaimSpec& claim, std::size_t node, double x,
                             double radius, double step) {
  if (tree.is_leaf(node)) return u(x - claim.at(node));
  double best = -1e300;
  for (double phi = -radius; phi <= radius + 1e-12; phi += step) {
    double val = 0.0;
    for (std::size_t c : tree.node(node).children) {
      const double w = x + phi * tree.increment(c)[0];
      val += tree.node(c).prob * grid_eu_oracle(tree, u, claim, c, w, radius, step);
    }
    if (val > best) best = val;
  }
  return best;
}

}  // namespace ncptest
