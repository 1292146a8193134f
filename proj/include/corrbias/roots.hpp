#pragma once

#include <cmath>
#include <string>

#include "corrbias/errors.hpp"

namespace corrbias {

/// Root of a monotone f inside [lo,hi] given f(lo), f(hi) of opposite sign.
/// Illinois-damped regula falsi with a bisection fallback: guaranteed
/// convergence, typically superlinear. Stops when |f| <= f_tol or the
/// bracket width falls below x_tol.
template <class F>
double solve_bracketed(F&& f, double lo, double hi, double flo, double fhi,
                       double x_tol, double f_tol, int max_iter,
                       const char* what = "solve_bracketed") {
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0))
    throw DomainError(std::string(what) + ": bracket endpoints have equal sign");

  double best_x = std::fabs(flo) < std::fabs(fhi) ? lo : hi;
  double best_f = std::fabs(flo) < std::fabs(fhi) ? flo : fhi;
  int side = 0;  // which endpoint was retained last (Illinois damping)

  for (int iter = 0; iter < max_iter; ++iter) {
    double x = (lo * fhi - hi * flo) / (fhi - flo);
    const double mid = 0.5 * (lo + hi);
    // keep iterates safely interior; fall back to bisection when the
    // secant point stagnates at an edge
    const double margin = 0.01 * (hi - lo);
    if (!(x > lo + margin) || !(x < hi - margin)) x = mid;

    const double fx = f(x);
    if (std::fabs(fx) < std::fabs(best_f)) {
      best_f = fx;
      best_x = x;
    }
    if (std::fabs(fx) <= f_tol) return x;

    if ((fx > 0) == (flo > 0)) {
      lo = x;
      flo = fx;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      hi = x;
      fhi = fx;
      if (side == +1) flo *= 0.5;
      side = +1;
    }
    if (hi - lo <= x_tol) return best_x;
  }
  throw ConvergenceError(std::string(what) + ": no convergence in " +
                             std::to_string(max_iter) + " iterations",
                         best_x, best_f, max_iter);
}

}  // namespace corrbias
