#pragma once

#include <map>
#include <vector>

#include "ncp/common.hpp"
#include "ncp/discrete_law.hpp"
#include "ncp/no_arbitrage.hpp"
#include "ncp/preferences.hpp"
#include "ncp/tree.hpp"

namespace ncp {

struct ChoquetValue {
  double v_plus = 0.0;
  double v_minus = 0.0;
  double v = 0.0;
};

/// Per-node radii outside of which a strategy provably scores below the
/// zero strategy. Finite and positive whenever (NA) holds and the loss
/// utility diverges.
struct SearchRegion {
  std::map<std::size_t, double> radius;  // non-leaf node index -> R
  double floor_value = 0.0;              // the lower bound c it was built from
};

/// Choquet integral of the gain part: sort the distinct utility levels of
/// the positive parts, weight the survival probabilities by w_plus. Exact on
/// step survival functions; no quadrature.
double choquet_plus(const DiscreteLaw& law, const UtilityFunction& u_plus,
                    const DistortionFunction& w_plus);

/// Mirror image on negative parts.
double choquet_minus(const DiscreteLaw& law, const UtilityFunction& u_minus,
                     const DistortionFunction& w_minus);

ChoquetValue cpt_value(const ScenarioTree& tree, const CPTPreference& pref,
                       const ClaimSpec& claim, const Strategy& strategy, double z,
                       const Config& cfg = {});

/// Quantitative tightness bound: per node solve
///   w_minus(P(node) * pi) * u_minus(loss_rate * R - offset) = C - c + 1
/// where loss_rate = min(beta, kappa) and the offset accounts for |z|, the
/// claim and worst-case wealth accumulated inside the region at earlier
/// levels. `c` must lower-bound the attainable supremum (V(0, z) works).
SearchRegion search_region(const ScenarioTree& tree, const CPTPreference& pref,
                           const ClaimSpec& claim, double z, const NAReport& na, double c,
                           const Config& cfg = {});

struct CPTResult {
  ChoquetValue value;
  Strategy strategy;
  SearchRegion region;
  bool converged = true;
};

/// Global search over strategies valued in span(D) within the certified
/// region: tensor seeds (when affordable) plus deterministic multi-start
/// compass search. The result never scores below V(0, z).
CPTResult optimize_cpt(const ScenarioTree& tree, const CPTPreference& pref,
                       const ClaimSpec& claim, double z, const Config& cfg = {});

}  // namespace ncp
