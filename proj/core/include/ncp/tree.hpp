#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ncp/common.hpp"
#include "ncp/discrete_law.hpp"

namespace ncp {

/// One atom of the filtration at a given time. `prob` is the conditional
/// branch probability given the parent; the root carries 1.
struct Node {
  std::string id;
  int time = 0;
  std::optional<std::size_t> parent;  // index into ScenarioTree::nodes()
  double prob = 1.0;
  Vec price;                           // S_t, one entry per asset
  std::vector<std::size_t> children;   // filled when the tree is built
};

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> violations;
};

/// Raw node description used to assemble a tree. Kept separate from Node so
/// that malformed inputs can still be constructed and diagnosed.
struct NodeSpec {
  std::string id;
  int time = 0;
  std::optional<std::string> parent;
  double prob = 1.0;
  Vec price;
};

/// Finite event tree: nodes stored level by level (all atoms of F_t are
/// contiguous), immutable once built.
class ScenarioTree {
 public:
  static ScenarioTree build(int horizon, int assets, const std::vector<NodeSpec>& specs);

  int horizon() const { return horizon_; }
  int assets() const { return assets_; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t root() const { return root_; }
  const Node& node(std::size_t i) const { return nodes_[i]; }
  const std::vector<Node>& nodes() const { return nodes_; }

  bool is_leaf(std::size_t i) const { return nodes_[i].children.empty(); }
  /// Indices of nodes at time t, a contiguous [first, last) range.
  std::pair<std::size_t, std::size_t> level(int t) const;
  std::vector<std::size_t> leaves() const;

  /// Price increment S_t - S_{t-1} leading into node i (i non-root).
  Vec increment(std::size_t i) const;
  /// Product of branch probabilities along the root path (derived, not stored).
  double unconditional_prob(std::size_t i) const;
  std::optional<std::size_t> find(const std::string& id) const;

 private:
  int horizon_ = 1;
  int assets_ = 1;
  std::size_t root_ = 0;
  std::vector<Node> nodes_;
  std::vector<std::pair<std::size_t, std::size_t>> levels_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

/// Predictable strategy: a d-vector attached to every non-leaf node, applied
/// on the step from that node to its children.
class Strategy {
 public:
  Strategy() = default;
  explicit Strategy(std::size_t node_count) : pos_(node_count) {}

  void set(std::size_t node, Vec position) { ensure(node); pos_[node] = std::move(position); }
  const Vec* find(std::size_t node) const {
    if (node >= pos_.size() || !pos_[node]) return nullptr;
    return &*pos_[node];
  }
  static Strategy zero(const ScenarioTree& tree);

 private:
  void ensure(std::size_t node) { if (node >= pos_.size()) pos_.resize(node + 1); }
  std::vector<std::optional<Vec>> pos_;
};

/// Terminal payoff B: per-leaf values, absent leaves default to zero.
class ClaimSpec {
 public:
  ClaimSpec() = default;
  void set(std::size_t leaf, double payoff) { payoff_[leaf] = payoff; }
  double at(std::size_t leaf) const {
    auto it = payoff_.find(leaf);
    return it == payoff_.end() ? 0.0 : it->second;
  }
  double max_abs(const ScenarioTree& tree) const;

 private:
  std::unordered_map<std::size_t, double> payoff_;
};

/// Diagnoses structural and probabilistic invariants; reports rather than throws.
ValidationReport validate_tree(const ScenarioTree& tree);

/// Wealth process X_t = z + sum of position * increment along each path.
/// Returns one wealth per node, indexed like the tree.
std::vector<double> wealth_process(const ScenarioTree& tree, const Strategy& strategy, double z);

/// Law of X_T - B over the leaves, atoms within cfg.atom_merge_tol coalesced.
DiscreteLaw terminal_law(const ScenarioTree& tree, const Strategy& strategy, double z,
                         const ClaimSpec& claim, const Config& cfg = {});

}  // namespace ncp
