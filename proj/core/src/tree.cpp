#include "ncp/tree.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ncp {

ScenarioTree ScenarioTree::build(int horizon, int assets, const std::vector<NodeSpec>& specs) {
  if (horizon < 1) throw Error(errc::input, "horizon must be >= 1");
  if (assets < 1) throw Error(errc::input, "assets must be >= 1");
  if (specs.empty()) throw Error(errc::input, "tree has no nodes");
  for (const NodeSpec& s : specs)
    if (s.time < 0) throw Error(errc::input, "node '" + s.id + "' has negative time");

  ScenarioTree t;
  t.horizon_ = horizon;
  t.assets_ = assets;

  // level order, stable within a level
  std::vector<std::size_t> order(specs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return specs[a].time < specs[b].time;
  });

  std::unordered_map<std::string, std::size_t> by_id;
  t.nodes_.reserve(specs.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const NodeSpec& s = specs[order[k]];
    if (by_id.count(s.id)) throw Error(errc::input, "duplicate node id '" + s.id + "'");
    by_id[s.id] = k;
    Node n;
    n.id = s.id;
    n.time = s.time;
    n.prob = s.prob;
    n.price = s.price;
    t.nodes_.push_back(std::move(n));
  }
  for (std::size_t k = 0; k < order.size(); ++k) {
    const NodeSpec& s = specs[order[k]];
    if (s.parent) {
      auto it = by_id.find(*s.parent);
      if (it == by_id.end())
        throw Error(errc::input, "node '" + s.id + "' references unknown parent '" + *s.parent + "'");
      t.nodes_[k].parent = it->second;
      t.nodes_[it->second].children.push_back(k);
    }
  }
  t.by_id_ = std::move(by_id);

  bool root_found = false;
  for (std::size_t k = 0; k < t.nodes_.size(); ++k) {
    if (!t.nodes_[k].parent) {
      if (!root_found) { t.root_ = k; root_found = true; }
    }
  }
  if (!root_found) throw Error(errc::input, "tree has no root (every node has a parent)");

  const int max_time = std::max(horizon, t.nodes_.back().time);
  t.levels_.assign(static_cast<std::size_t>(max_time) + 1, {0, 0});
  std::size_t i = 0;
  for (int time = 0; time <= max_time; ++time) {
    const std::size_t first = i;
    while (i < t.nodes_.size() && t.nodes_[i].time == time) ++i;
    t.levels_[static_cast<std::size_t>(time)] = {first, i};
  }
  return t;
}

std::pair<std::size_t, std::size_t> ScenarioTree::level(int t) const {
  if (t < 0 || static_cast<std::size_t>(t) >= levels_.size()) return {0, 0};
  return levels_[static_cast<std::size_t>(t)];
}

std::vector<std::size_t> ScenarioTree::leaves() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].children.empty()) out.push_back(i);
  return out;
}

Vec ScenarioTree::increment(std::size_t i) const {
  const Node& n = nodes_[i];
  if (!n.parent) throw Error(errc::input, "root node has no price increment");
  return sub(n.price, nodes_[*n.parent].price);
}

double ScenarioTree::unconditional_prob(std::size_t i) const {
  double p = 1.0;
  for (std::optional<std::size_t> cur = i; cur;) {
    p *= nodes_[*cur].prob;
    cur = nodes_[*cur].parent;
  }
  return p;
}

std::optional<std::size_t> ScenarioTree::find(const std::string& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

Strategy Strategy::zero(const ScenarioTree& tree) {
  Strategy s(tree.size());
  for (std::size_t i = 0; i < tree.size(); ++i)
    if (!tree.is_leaf(i)) s.set(i, Vec(static_cast<std::size_t>(tree.assets()), 0.0));
  return s;
}

double ClaimSpec::max_abs(const ScenarioTree& tree) const {
  double m = 0.0;
  for (std::size_t leaf : tree.leaves()) m = std::max(m, std::abs(at(leaf)));
  return m;
}

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

ValidationReport validate_tree(const ScenarioTree& tree) {
  ValidationReport rep;
  auto fail = [&rep](const std::string& msg) {
    rep.ok = false;
    rep.violations.push_back(msg);
  };

  std::size_t roots = 0;
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const Node& n = tree.node(i);
    if (!n.parent) {
      ++roots;
      if (n.time != 0) fail("root node '" + n.id + "' is not at time 0");
      if (std::abs(n.prob - 1.0) > 1e-12)
        fail("root node '" + n.id + "' must carry probability 1, got " + fmt(n.prob));
    } else {
      const Node& p = tree.node(*n.parent);
      if (n.time != p.time + 1)
        fail("time gap: node '" + n.id + "' at time " + fmt(n.time) + " under parent '" + p.id +
             "' at time " + fmt(p.time));
      if (!(n.prob > 0.0) || n.prob > 1.0)
        fail("node '" + n.id + "' branch probability " + fmt(n.prob) + " outside (0,1]");
    }
    if (static_cast<int>(n.price.size()) != tree.assets())
      fail("node '" + n.id + "' price dimension " + fmt(static_cast<double>(n.price.size())) +
           " does not match assets=" + fmt(tree.assets()));
    for (double v : n.price)
      if (!std::isfinite(v)) fail("node '" + n.id + "' has a non-finite price entry");

    if (n.children.empty()) {
      if (n.time != tree.horizon())
        fail("leaf '" + n.id + "' at time " + fmt(n.time) + ", expected leaves only at horizon " +
             fmt(tree.horizon()));
    } else {
      if (n.time >= tree.horizon())
        fail("node '" + n.id + "' at time " + fmt(n.time) + " has children beyond the horizon");
      double sum = 0.0;
      for (std::size_t c : n.children) sum += tree.node(c).prob;
      if (std::abs(sum - 1.0) > 1e-12)
        fail("children of '" + n.id + "': probabilities sum to " + fmt(sum));
    }
  }
  if (roots != 1) fail("tree must have exactly one root, found " + fmt(static_cast<double>(roots)));
  return rep;
}

std::vector<double> wealth_process(const ScenarioTree& tree, const Strategy& strategy, double z) {
  std::vector<double> wealth(tree.size(), 0.0);
  wealth[tree.root()] = z;
  // level order guarantees parents come first
  for (std::size_t i = 0; i < tree.size(); ++i) {
    if (tree.is_leaf(i)) continue;
    const Vec* phi = strategy.find(i);
    if (!phi)
      throw Error(errc::input, "strategy has no position at node '" + tree.node(i).id + "'");
    for (std::size_t c : tree.node(i).children)
      wealth[c] = wealth[i] + dot(*phi, tree.increment(c));
  }
  return wealth;
}

DiscreteLaw terminal_law(const ScenarioTree& tree, const Strategy& strategy, double z,
                         const ClaimSpec& claim, const Config& cfg) {
  const std::vector<double> wealth = wealth_process(tree, strategy, z);
  std::vector<DiscreteLaw::Atom> samples;
  for (std::size_t leaf : tree.leaves())
    samples.push_back({wealth[leaf] - claim.at(leaf), tree.unconditional_prob(leaf)});
  return DiscreteLaw::from_samples(std::move(samples), cfg.atom_merge_tol);
}

}  // namespace ncp
