#pragma once

#include <functional>
#include <map>
#include <string>

#include "ncp/common.hpp"

namespace ncp {

/// Scalar utility. `upper_bound` is the declared cap C (+inf for loss-side
/// CPT families); `diverges_down` records whether u(x) -> -inf as x -> -inf,
/// the hypothesis separating the existence regime from the non-existence demo.
struct UtilityFunction {
  std::string family;
  std::map<std::string, double> params;
  std::function<double(double)> f;
  double upper_bound = 1.0;
  bool diverges_down = true;

  double operator()(double x) const { return f(x); }
  bool bounded_above() const { return std::isfinite(upper_bound); }
};

/// Probability distortion w: [0,1] -> [0,1], w(0)=0, w(1)=1, non-decreasing.
struct DistortionFunction {
  std::string family;
  std::map<std::string, double> params;
  std::function<double(double)> w;

  double operator()(double p) const { return w(p); }
};

/// CPT preference pair: u_plus on gains (bounded above), u_minus on losses
/// (diverging), distortions applied to tail probabilities of each part.
struct CPTPreference {
  UtilityFunction u_plus;
  UtilityFunction u_minus;
  DistortionFunction w_plus;
  DistortionFunction w_minus;

  /// u(x) = u_plus(x) for x >= 0, -u_minus(-x) for x < 0.
  double composite(double x) const { return x >= 0.0 ? u_plus(x) : -u_minus(-x); }
};

struct Preference {
  enum class Kind { eu, cpt };
  Kind kind = Kind::eu;
  UtilityFunction utility;  // kind == eu
  CPTPreference cpt;        // kind == cpt
};

/// Families: cara_capped {lambda}, s_shaped_capped {lambda, alpha, mu},
/// log_loss {}, bounded_below {a}, capped_linear {slope, cap},
/// linear {slope}, power {gamma, scale}, exp_loss {lambda}.
UtilityFunction make_builtin_utility(const std::string& family,
                                     const std::map<std::string, double>& params);

/// Families: identity {}, power {gamma}, kt_inverse_s {gamma}.
DistortionFunction make_builtin_distortion(const std::string& family,
                                           const std::map<std::string, double>& params);

/// Right-continuous inverse max{p : w(p) <= q}, bisection to ~1e-10.
double inverse_distortion(const DistortionFunction& w, double q, const Config& cfg = {});

struct PreferenceCheck {
  bool ok = true;
  std::vector<std::string> issues;
};

/// Sampled checks of the standing assumptions: monotone and capped on a grid,
/// plus the divergence hook u(-10^k) <= -k (k = 2..6) when diverges_down is
/// set. Asymptotic conditions are certified heuristically by sampling.
PreferenceCheck check_utility(const UtilityFunction& u);

/// w(0)=0, w(1)=1, monotone, grid-sampled modulus of continuity.
PreferenceCheck check_distortion(const DistortionFunction& w);

/// u_plus/u_minus on the half line with u(0)=0, u_plus capped, u_minus
/// diverging (sampled), composite utility monotone and continuous at 0.
PreferenceCheck check_cpt(const CPTPreference& p);

}  // namespace ncp
