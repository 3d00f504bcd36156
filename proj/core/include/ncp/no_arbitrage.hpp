#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ncp/common.hpp"
#include "ncp/tree.hpp"

namespace ncp {

/// Conditional one-step support at a non-leaf node: child increments with
/// their branch probabilities and an orthonormal basis of their linear span D.
/// Under (NA) the affine hull of the support equals this span.
struct SupportGeometry {
  std::size_t node = 0;
  std::vector<Vec> increments;   // one d-vector per child, in child order
  std::vector<double> probs;     // conditional child probabilities
  std::vector<Vec> basis;        // orthonormal basis of span(D), r vectors
  std::vector<Vec> coords;       // increments expressed in the basis (m x r)
  double scale = 0.0;            // largest increment norm

  bool trivial() const { return basis.empty(); }
  std::size_t rank() const { return basis.size(); }
};

/// Per-node quantitative no-arbitrage constants and the global verdict.
/// beta/kappa/pi are set only on nodes with a non-trivial span.
struct NAReport {
  struct PerNode {
    std::size_t node = 0;
    std::string id;
    std::size_t rank = 0;
    std::optional<double> beta;
    std::optional<double> kappa;
    std::optional<double> pi;
  };
  bool na = true;
  std::optional<std::size_t> witness_node;
  std::optional<Strategy> witness;
  std::vector<PerNode> nodes;  // one entry per non-leaf node, level order

  const PerNode* find(std::size_t node_index) const {
    for (const auto& n : nodes)
      if (n.node == node_index) return &n;
    return nullptr;
  }
};

SupportGeometry support_geometry(const ScenarioTree& tree, std::size_t node,
                                 const Config& cfg = {});

/// Orthogonal projection onto span(D); leaves one-step gains unchanged on
/// every support point.
Vec project_to_D(const SupportGeometry& geom, const Vec& xi);

/// Verdict-only (NA) check: at every non-leaf node, 0 must lie in the
/// relative interior of the convex hull of the child increments (decided by a
/// small linear program). On failure the report carries a one-step witness
/// lifted to a global strategy, zero elsewhere.
NAReport check_na(const ScenarioTree& tree, const Config& cfg = {});

/// Fills beta (worst-direction guaranteed loss per unit) and kappa (minimal
/// branch probability) on every non-trivial node. Throws errc::arbitrage when
/// (NA) fails. beta is exact for rank 1 and certified-by-scan for rank 2..3.
NAReport quantitative_na(const ScenarioTree& tree, const Config& cfg = {});

/// Fills pi: kappa at the node times the product over later levels of the
/// worst descendant kappa (1 at trivial nodes) -- a conservative lower bound
/// on the probability of losing at the next step and never gaining after.
NAReport pi_bounds(const ScenarioTree& tree, NAReport report);

}  // namespace ncp
