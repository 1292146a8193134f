#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <vector>

#include "corrbias/errors.hpp"

namespace corrbias {

struct PanelResult {
  double value;   ///< 15-point Kronrod estimate
  double error;   ///< QUADPACK-style error estimate
  double resabs;  ///< integral of |f|
};

namespace detail {

// Gauss 7 / Kronrod 15 nodes and weights on [-1,1] (QUADPACK dqk15).
// Even indices are Kronrod-only abscissae, odd indices carry the embedded
// Gauss rule, index 7 is the center.
inline constexpr double kGk15Nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0};

inline constexpr double kGk15KronrodW[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr double kGk15GaussW[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

}  // namespace detail

/// One Gauss7/Kronrod15 panel on [a,b] with the QUADPACK error estimate.
template <class F>
PanelResult gk15_panel(F&& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  double fv[15];
  fv[14] = f(center);
  for (int i = 0; i < 7; ++i) {
    const double dx = half * detail::kGk15Nodes[i];
    fv[2 * i] = f(center + dx);
    fv[2 * i + 1] = f(center - dx);
  }

  double resk = detail::kGk15KronrodW[7] * fv[14];
  double resabs = std::fabs(resk);
  double resg = detail::kGk15GaussW[3] * fv[14];
  for (int i = 0; i < 7; ++i) {
    const double fsum = fv[2 * i] + fv[2 * i + 1];
    resk += detail::kGk15KronrodW[i] * fsum;
    resabs += detail::kGk15KronrodW[i] *
              (std::fabs(fv[2 * i]) + std::fabs(fv[2 * i + 1]));
    if (i % 2 == 1)  // embedded Gauss abscissae
      resg += detail::kGk15GaussW[i / 2] * fsum;
  }

  const double reskh = 0.5 * resk;
  double resasc = detail::kGk15KronrodW[7] * std::fabs(fv[14] - reskh);
  for (int i = 0; i < 7; ++i)
    resasc += detail::kGk15KronrodW[i] * (std::fabs(fv[2 * i] - reskh) +
                                          std::fabs(fv[2 * i + 1] - reskh));

  resabs *= std::fabs(half);
  resasc *= std::fabs(half);
  double err = std::fabs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  const double eps50 = 50.0 * std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / eps50)
    err = std::max(eps50 * resabs, err);

  return {resk * half, err, resabs};
}

/// Globally adaptive Gauss-Kronrod integration of f over [a,b] to absolute
/// tolerance abs_tol. The interval with the largest error estimate is split
/// first. Optional split points seed the initial subdivision so that sharp
/// interior features are sampled before the first error estimate is trusted.
template <class F>
double integrate_adaptive(F&& f, double a, double b, double abs_tol,
                          std::span<const double> split_points = {},
                          int max_panels = 20000) {
  if (!(b > a)) return 0.0;

  struct Interval {
    double err, value, lo, hi;
    bool operator<(const Interval& o) const { return err < o.err; }
  };

  std::vector<double> edges;
  edges.push_back(a);
  for (double s : split_points)
    if (s > a && s < b) edges.push_back(s);
  edges.push_back(b);
  std::sort(edges.begin(), edges.end());

  std::priority_queue<Interval> queue;
  double total = 0.0, total_err = 0.0;
  int panels = 0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    PanelResult p = gk15_panel(f, edges[i], edges[i + 1]);
    queue.push({p.error, p.value, edges[i], edges[i + 1]});
    total += p.value;
    total_err += p.error;
    ++panels;
  }

  while (total_err > abs_tol) {
    if (panels >= max_panels || queue.empty())
      throw ConvergenceError(
          "adaptive quadrature: error " + std::to_string(total_err) +
              " above tolerance after " + std::to_string(panels) + " panels",
          total, total_err, panels);
    Interval worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (mid <= worst.lo || mid >= worst.hi) {
      // interval at floating-point resolution; keep its estimate as-is
      total_err -= worst.err;
      continue;
    }
    PanelResult left = gk15_panel(f, worst.lo, mid);
    PanelResult right = gk15_panel(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.err;
    queue.push({left.error, left.value, worst.lo, mid});
    queue.push({right.error, right.value, mid, worst.hi});
    ++panels;
  }
  return total;
}

}  // namespace corrbias
