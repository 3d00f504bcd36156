#include "ncp/preferences.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace ncp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double take(const std::map<std::string, double>& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void reject_unknown(const std::map<std::string, double>& params,
                    const std::set<std::string>& allowed, const std::string& family) {
  for (const auto& [key, _] : params)
    if (!allowed.count(key))
      throw Error(errc::input, "family '" + family + "' has no parameter '" + key + "'");
}

void require_positive(double v, const std::string& name, const std::string& family) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw Error(errc::input, "family '" + family + "': parameter " + name + " must be positive");
}

}  // namespace

UtilityFunction make_builtin_utility(const std::string& family,
                                     const std::map<std::string, double>& params) {
  UtilityFunction u;
  u.family = family;
  u.params = params;

  if (family == "cara_capped") {
    reject_unknown(params, {"lambda"}, family);
    const double lambda = take(params, "lambda", 1.0);
    require_positive(lambda, "lambda", family);
    u.f = [lambda](double x) { return 1.0 - std::exp(-lambda * x); };
    u.upper_bound = 1.0;
    u.diverges_down = true;
  } else if (family == "s_shaped_capped") {
    reject_unknown(params, {"lambda", "alpha", "mu"}, family);
    const double lambda = take(params, "lambda", 1.0);
    const double alpha = take(params, "alpha", 1.0);
    const double mu = take(params, "mu", 1.0);
    require_positive(lambda, "lambda", family);
    require_positive(alpha, "alpha", family);
    require_positive(mu, "mu", family);
    u.f = [lambda, alpha, mu](double x) {
      return x >= 0.0 ? 1.0 - std::exp(-lambda * x) : -alpha * (std::exp(-mu * x) - 1.0);
    };
    u.upper_bound = 1.0;
    u.diverges_down = true;
  } else if (family == "log_loss") {
    reject_unknown(params, {}, family);
    u.f = [](double x) { return x >= 0.0 ? 1.0 - std::exp(-x) : -std::log1p(-x); };
    u.upper_bound = 1.0;
    u.diverges_down = true;
  } else if (family == "bounded_below") {
    reject_unknown(params, {"a"}, family);
    const double a = take(params, "a", 0.5);
    require_positive(a, "a", family);
    u.f = [a](double x) { return x >= 0.0 ? 1.0 - std::exp(-x) : a * (std::exp(x) - 1.0); };
    u.upper_bound = 1.0;
    u.diverges_down = false;  // floor at -a
  } else if (family == "capped_linear") {
    reject_unknown(params, {"slope", "cap"}, family);
    const double slope = take(params, "slope", 1.0);
    const double cap = take(params, "cap", 1e6);
    require_positive(slope, "slope", family);
    require_positive(cap, "cap", family);
    u.f = [slope, cap](double x) { return std::min(slope * x, cap); };
    u.upper_bound = cap;
    u.diverges_down = true;
  } else if (family == "exp_loss") {
    // convex and diverging on the half line; -exp_loss(-x) mirrors cara_capped
    reject_unknown(params, {"lambda"}, family);
    const double lambda = take(params, "lambda", 1.0);
    require_positive(lambda, "lambda", family);
    u.f = [lambda](double x) { return std::expm1(lambda * x); };
    u.upper_bound = kInf;
    u.diverges_down = false;  // floored at -1 on the real line
  } else if (family == "linear") {
    reject_unknown(params, {"slope"}, family);
    const double slope = take(params, "slope", 1.0);
    require_positive(slope, "slope", family);
    u.f = [slope](double x) { return slope * x; };
    u.upper_bound = kInf;
    u.diverges_down = true;
  } else if (family == "power") {
    reject_unknown(params, {"gamma", "scale"}, family);
    const double gamma = take(params, "gamma", 1.0);
    const double scale = take(params, "scale", 1.0);
    require_positive(gamma, "gamma", family);
    require_positive(scale, "scale", family);
    if (gamma > 20.0)
      throw Error(errc::input, "family 'power': gamma above 20 overflows the sampling range");
    u.f = [gamma, scale](double x) {
      const double m = scale * std::pow(std::abs(x), gamma);
      return x >= 0.0 ? m : -m;
    };
    u.upper_bound = kInf;
    u.diverges_down = true;
  } else {
    throw Error(errc::input, "unknown utility family '" + family + "'");
  }

  const PreferenceCheck check = check_utility(u);
  if (!check.ok)
    throw Error(errc::input, "utility family '" + family + "' failed validation: " + check.issues.front());
  return u;
}

DistortionFunction make_builtin_distortion(const std::string& family,
                                           const std::map<std::string, double>& params) {
  DistortionFunction d;
  d.family = family;
  d.params = params;

  if (family == "identity") {
    reject_unknown(params, {}, family);
    d.w = [](double p) { return p; };
  } else if (family == "power") {
    reject_unknown(params, {"gamma"}, family);
    const double gamma = take(params, "gamma", 1.0);
    if (!(gamma > 0.0) || !std::isfinite(gamma))
      throw Error(errc::input, "distortion 'power': gamma must be positive");
    d.w = [gamma](double p) { return std::pow(p, gamma); };
  } else if (family == "kt_inverse_s") {
    reject_unknown(params, {"gamma"}, family);
    const double gamma = take(params, "gamma", 0.65);
    // below ~0.28 the weighting function stops being monotone
    if (!(gamma > 0.28) || !std::isfinite(gamma))
      throw Error(errc::input, "distortion 'kt_inverse_s': gamma must exceed 0.28");
    d.w = [gamma](double p) {
      if (p <= 0.0) return 0.0;
      if (p >= 1.0) return 1.0;
      const double a = std::pow(p, gamma);
      const double b = std::pow(1.0 - p, gamma);
      return a / std::pow(a + b, 1.0 / gamma);
    };
  } else {
    throw Error(errc::input, "unknown distortion family '" + family + "'");
  }

  const PreferenceCheck check = check_distortion(d);
  if (!check.ok)
    throw Error(errc::input, "distortion family '" + family + "' failed validation: " + check.issues.front());
  return d;
}

double inverse_distortion(const DistortionFunction& w, double q, const Config& cfg) {
  if (!(q >= 0.0 && q <= 1.0)) throw Error(errc::input, "inverse_distortion: q outside [0,1]");
  if (q >= 1.0) return 1.0;
  // invariant: w(lo) <= q
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < cfg.bisect_iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (w(mid) <= q) lo = mid;
    else hi = mid;
  }
  return lo;
}

PreferenceCheck check_utility(const UtilityFunction& u) {
  PreferenceCheck out;
  auto fail = [&out](const std::string& msg) {
    out.ok = false;
    out.issues.push_back(msg);
  };

  // coarse wide grid plus a dense grid around the origin
  std::vector<double> xs;
  for (int i = 0; i <= 5000; ++i) xs.push_back(-1e6 + i * (2e6 / 5000.0));
  for (int i = 0; i <= 5000; ++i) xs.push_back(-50.0 + i * (100.0 / 5000.0));
  std::sort(xs.begin(), xs.end());

  double prev = -kInf;
  for (double x : xs) {
    const double v = u(x);
    if (std::isnan(v)) {
      fail("u produced NaN at x=" + std::to_string(x));
      break;
    }
    if (v > u.upper_bound + 1e-12) {
      fail("u exceeds its declared upper bound at x=" + std::to_string(x));
      break;
    }
    if (v + 1e-12 < prev) {
      fail("u is decreasing near x=" + std::to_string(x));
      break;
    }
    prev = std::max(prev, v);
  }

  if (u.diverges_down) {
    for (int k = 2; k <= 6; ++k) {
      const double v = u(-std::pow(10.0, k));
      if (!(v <= -static_cast<double>(k))) {
        fail("divergence hook failed: u(-10^" + std::to_string(k) + ") > -" + std::to_string(k));
        break;
      }
    }
  }
  return out;
}

PreferenceCheck check_distortion(const DistortionFunction& d) {
  PreferenceCheck out;
  auto fail = [&out](const std::string& msg) {
    out.ok = false;
    out.issues.push_back(msg);
  };

  if (std::abs(d(0.0)) > 1e-12) fail("w(0) != 0");
  if (std::abs(d(1.0) - 1.0) > 1e-12) fail("w(1) != 1");

  const int n = 10000;
  double prev = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double p = static_cast<double>(i) / n;
    const double v = d(p);
    if (std::isnan(v) || v < -1e-12 || v > 1.0 + 1e-12) {
      fail("w leaves [0,1] at p=" + std::to_string(p));
      break;
    }
    if (v + 1e-12 < prev) {
      fail("w is decreasing near p=" + std::to_string(p));
      break;
    }
    // crude modulus guard; real continuity is a family property
    if (v - prev > 0.5) {
      fail("w jumps by more than 0.5 over one grid step near p=" + std::to_string(p));
      break;
    }
    prev = std::max(prev, v);
  }
  return out;
}

PreferenceCheck check_cpt(const CPTPreference& p) {
  PreferenceCheck out;
  auto fail = [&out](const std::string& msg) {
    out.ok = false;
    out.issues.push_back(msg);
  };

  if (!p.u_plus.bounded_above()) fail("u_plus must be bounded above");
  if (std::abs(p.u_plus(0.0)) > 1e-12) fail("u_plus(0) != 0");
  if (std::abs(p.u_minus(0.0)) > 1e-12) fail("u_minus(0) != 0");

  // sampled divergence of the loss utility
  bool diverges = true;
  for (int k = 2; k <= 6; ++k)
    if (!(p.u_minus(std::pow(10.0, k)) >= static_cast<double>(k))) diverges = false;
  if (!diverges) fail("u_minus does not diverge on the sampled ladder");

  // composite utility monotone across the kink
  double prev = -kInf;
  for (int i = 0; i <= 4000; ++i) {
    const double x = -200.0 + i * 0.1;
    const double v = p.composite(x);
    if (v + 1e-12 < prev) {
      fail("composite utility decreasing near x=" + std::to_string(x));
      break;
    }
    prev = std::max(prev, v);
  }

  // one-sided limits at 0
  if (std::abs(p.composite(1e-10)) > 1e-9 || std::abs(p.composite(-1e-10)) > 1e-9)
    fail("composite utility discontinuous at 0");

  const PreferenceCheck cp = check_utility(p.u_plus);
  if (!cp.ok) for (const auto& m : cp.issues) fail("u_plus: " + m);
  const PreferenceCheck cw1 = check_distortion(p.w_plus);
  if (!cw1.ok) for (const auto& m : cw1.issues) fail("w_plus: " + m);
  const PreferenceCheck cw2 = check_distortion(p.w_minus);
  if (!cw2.ok) for (const auto& m : cw2.issues) fail("w_minus: " + m);
  return out;
}

}  // namespace ncp
