#include "ncp/discrete_law.hpp"

#include <algorithm>
#include <cmath>

namespace ncp {

double DiscreteLaw::total_mass() const {
  double s = 0.0;
  for (const auto& a : atoms) s += a.prob;
  return s;
}

double DiscreteLaw::cdf(double x) const {
  double s = 0.0;
  for (const auto& a : atoms) {
    if (a.value <= x) s += a.prob;
    else break;
  }
  return s;
}

DiscreteLaw DiscreteLaw::from_samples(std::vector<Atom> samples, double merge_tol) {
  std::sort(samples.begin(), samples.end(),
            [](const Atom& a, const Atom& b) { return a.value < b.value; });
  DiscreteLaw law;
  for (const auto& s : samples) {
    if (s.prob <= 0.0) continue;
    if (!law.atoms.empty() && s.value - law.atoms.back().value <= merge_tol) {
      Atom& last = law.atoms.back();
      const double mass = last.prob + s.prob;
      last.value = (last.value * last.prob + s.value * s.prob) / mass;
      last.prob = mass;
    } else {
      law.atoms.push_back(s);
    }
  }
  return law;
}

}  // namespace ncp
