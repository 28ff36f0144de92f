#include "brw/roots.hpp"

#include <cmath>

#include "brw/error.hpp"

namespace brw {

RootResult solve_decreasing(const std::function<double(double)>& f, double hi, double rel_tol,
                            double switch_rel, double floor) {
  RootResult r;
  auto eval = [&](double u) {
    ++r.evaluations;
    return f(std::exp(u));
  };
  double u_hi = std::log(hi);
  double f_hi = eval(u_hi);
  for (int i = 0; f_hi >= 0.0; ++i) {
    if (i == 200) throw Error(ErrorCode::BracketNotFound, "upper bracket expansion exhausted");
    u_hi += std::log(2.0);
    f_hi = eval(u_hi);
  }
  if (f_hi == 0.0) {
    r.x = std::exp(u_hi);
    return r;
  }
  double u_lo = u_hi, f_lo = f_hi;
  const double u_floor = std::log(floor);
  while (f_lo < 0.0) {
    u_hi = u_lo;
    f_hi = f_lo;
    u_lo -= std::log(10.0);
    if (u_lo < u_floor) throw Error(ErrorCode::BracketNotFound, "no sign change above the lower limit");
    f_lo = eval(u_lo);
  }
  // Bisection in log x.
  while (u_hi - u_lo > switch_rel) {
    const double u = 0.5 * (u_lo + u_hi);
    const double fu = eval(u);
    if (fu > 0.0) {
      u_lo = u;
      f_lo = fu;
    } else {
      u_hi = u;
      f_hi = fu;
    }
  }
  // Secant (regula falsi with the Illinois modification) inside the bracket.
  int side = 0;
  double u = u_lo, fu = f_lo;
  for (int it = 0; it < 100 && u_hi - u_lo > rel_tol; ++it) {
    u = (u_lo * f_hi - u_hi * f_lo) / (f_hi - f_lo);
    if (!(u > u_lo && u < u_hi)) u = 0.5 * (u_lo + u_hi);
    fu = eval(u);
    if (fu == 0.0) {
      u_lo = u_hi = u;
      break;
    }
    if (fu > 0.0) {
      u_lo = u;
      f_lo = fu;
      if (side == 1) f_hi *= 0.5;
      side = 1;
    } else {
      u_hi = u;
      f_hi = fu;
      if (side == -1) f_lo *= 0.5;
      side = -1;
    }
    if (std::abs(fu) == 0.0) break;
  }
  r.x = std::exp(u);
  r.residual = fu;
  return r;
}

}  // namespace brw
