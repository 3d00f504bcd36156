#pragma once

#include <vector>

namespace ncp::detail {

struct LPResult {
  enum class Status { optimal, infeasible, unbounded };
  Status status = Status::optimal;
  double value = 0.0;
  std::vector<double> x;
};

/// Dense two-phase simplex for  max c.x  s.t.  A x <= b, x >= 0.
/// b entries may be negative. Bland's rule, so it terminates; intended for
/// tiny problems (tens of rows/columns). Inputs should be scaled to O(1).
LPResult solve_lp(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                  const std::vector<double>& c, double eps = 1e-9);

}  // namespace ncp::detail
