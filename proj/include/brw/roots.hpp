#pragma once

#include <functional>

namespace brw {

struct RootResult {
  double x = 0.0;
  double residual = 0.0;
  int evaluations = 0;
};

/// Root of a strictly decreasing f on (0, inf), searched in log x. The upper
/// bracket starts at `hi` and is doubled until f(hi) < 0; the lower bracket is
/// divided by 10 from hi until f(lo) > 0 or `floor` is passed (BracketNotFound).
/// Bisection runs until the bracket is `switch_rel` wide, then a safeguarded
/// secant polishes to `rel_tol`.
RootResult solve_decreasing(const std::function<double(double)>& f, double hi, double rel_tol = 1e-10,
                            double switch_rel = 0.05, double floor = 1e-300);

}  // namespace brw
