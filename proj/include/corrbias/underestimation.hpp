#pragma once

#include <Eigen/Core>
#include <cmath>

#include "corrbias/config.hpp"
#include "corrbias/density.hpp"
#include "corrbias/errors.hpp"
#include "corrbias/estimators.hpp"

namespace corrbias {

/// P(r_tilde < rho) sampled on a grid of population correlations, for one
/// transform and sample size.
struct UnderestimationCurve {
  EstimatorTransform transform;
  double n;
  Eigen::ArrayXd rho;
  Eigen::ArrayXd prob;
};

/// Exact probability of underestimation P(r_tilde < rho) = F(G^{-1}(rho)|rho)
/// for samples of size n. Each transform contributes its inverse on its
/// image and zero below it:
///   identity        F(rho|rho)
///   affine          F((rho-a)/(1-a)|rho) for rho >= 2a-1, else 0
///   shrink          F(rho/(1-b)|rho) for rho < 0 (0 when b = 1 or
///                   rho <= b-1), F(rho|rho) for rho >= 0
///   shift           eps -> 0 limit taken after integration: F(rho-c|rho)
///                   for rho > c-1, else 0
///   quantile        F(Q(1-alpha|rho)|rho), which Theorem-style constancy
///                   pins at 1-alpha up to solver tolerance
/// The event uses the strict inequality, so the b = 1 atom at 0 is excluded.
inline double prob_underestimation(const EstimatorTransform& t, double rho,
                                   double n, const NumericConfig& cfg = {}) {
  validate_transform(t);
  if (!(std::fabs(rho) < 1.0))
    throw DomainError("prob_underestimation: require -1 < rho < 1");
  if (!(n > 2.0)) throw DomainError("prob_underestimation: require n > 2");

  const DensityEvaluator ev({n, rho}, cfg);
  struct Prob {
    double rho;
    const DensityEvaluator& ev;
    const NumericConfig& cfg;
    double operator()(const Identity&) const { return ev.cdf(rho); }
    double operator()(const AffineTowardOne& t) const {
      if (rho < 2.0 * t.a - 1.0) return 0.0;
      return ev.cdf(std::clamp((rho - t.a) / (1.0 - t.a), -1.0, 1.0));
    }
    double operator()(const NegativeShrink& t) const {
      if (rho >= 0.0) return ev.cdf(rho);
      if (t.b == 1.0 || rho <= t.b - 1.0) return 0.0;
      return ev.cdf(std::clamp(rho / (1.0 - t.b), -1.0, 1.0));
    }
    double operator()(const UpwardShift& t) const {
      if (rho <= t.c - 1.0) return 0.0;
      return ev.cdf(rho - t.c);
    }
    double operator()(const QuantileBias& t) const {
      const double inv = pearson_quantile(1.0 - t.alpha, {t.n, rho}, cfg);
      return ev.cdf(inv);
    }
  };
  return std::visit(Prob{rho, ev, cfg}, t);
}

/// Pointwise curve over a strictly increasing grid inside (-1,1).
inline UnderestimationCurve underestimation_curve(const EstimatorTransform& t,
                                                  double n,
                                                  const Eigen::ArrayXd& grid,
                                                  const NumericConfig& cfg = {}) {
  if (grid.size() == 0)
    throw DomainError("underestimation_curve: empty grid");
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    if (!(std::fabs(grid[i]) < 1.0))
      throw DomainError("underestimation_curve: grid must lie inside (-1,1)");
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw DomainError("underestimation_curve: grid must strictly increase");
  }
  UnderestimationCurve out{t, n, grid, Eigen::ArrayXd(grid.size())};
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    out.prob[i] = prob_underestimation(t, grid[i], n, cfg);
  return out;
}

/// Default figure grid: 201 equally spaced points on [-0.99, 0.99].
inline Eigen::ArrayXd default_rho_grid(int points = 201) {
  if (points < 1) throw DomainError("default_rho_grid: need at least 1 point");
  return Eigen::ArrayXd::LinSpaced(points, -0.99, 0.99);
}

}  // namespace corrbias
