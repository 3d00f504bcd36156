#pragma once

#include <cstddef>
#include <vector>

namespace ncp {

/// Finitely supported distribution on the real line, atoms sorted by value.
struct DiscreteLaw {
  struct Atom {
    double value;
    double prob;
  };
  std::vector<Atom> atoms;

  double total_mass() const;
  /// P(X <= x)
  double cdf(double x) const;
  /// sum of f(value) * prob
  template <class F>
  double expect(F&& f) const {
    double s = 0.0;
    for (const auto& a : atoms) s += f(a.value) * a.prob;
    return s;
  }

  /// Builds a law from (value, prob) pairs: sorts, drops zero-mass points and
  /// coalesces values closer than merge_tol (mass-weighted representative).
  static DiscreteLaw from_samples(std::vector<Atom> samples, double merge_tol);
};

}  // namespace ncp
