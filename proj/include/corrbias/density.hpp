#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "corrbias/config.hpp"
#include "corrbias/errors.hpp"
#include "corrbias/quadrature.hpp"
#include "corrbias/roots.hpp"

namespace corrbias {

namespace detail {

/// Value represented as mantissa * exp(exponent); keeps the density series
/// representable across the Gamma^2((n+k-1)/2) growth range.
struct Scaled {
  double mantissa;
  double exponent;
};

inline double log1m_sq(double r) {
  // log(1 - r^2) without cancellation near |r| = 1
  return std::log1p(-r) + std::log1p(r);
}

}  // namespace detail

/// Evaluator for the exact sampling density p(r|rho) of the correlation
/// estimator at sample size n (any real n > 2), its CDF and its quantile
/// function. Construction precomputes the r-independent factors; all
/// methods are const and thread-safe.
///
/// The density is the Fisher series form
///   p(r|rho) = 2^(n-3)/(pi Gamma(n-2)) (1-rho^2)^((n-1)/2) (1-r^2)^((n-4)/2)
///              * sum_k Gamma^2((n+k-1)/2) (2 rho r)^k / k!
/// with all gamma factors handled in log space. For rho = 0 only the k = 0
/// term survives and the evaluator uses the closed form
///   p(r|0) = Gamma((n-1)/2) / (sqrt(pi) Gamma((n-2)/2)) (1-r^2)^(n/2-2).
class DensityEvaluator {
 public:
  DensityEvaluator(const DensityParams& params, const NumericConfig& cfg = {})
      : p_(params), cfg_(cfg) {
    p_.validate();
    cfg_.validate();
    const double n = p_.n;
    log_norm_ = (n - 3.0) * std::numbers::ln2 - std::log(std::numbers::pi) -
                std::lgamma(n - 2.0) +
                0.5 * (n - 1.0) * detail::log1m_sq(p_.rho);
    log_t0_ = 2.0 * std::lgamma(0.5 * (n - 1.0));
    g_even_ = std::exp(std::lgamma(0.5 * n) - std::lgamma(0.5 * (n - 1.0)));
    g_odd_ = 0.5 * (n - 1.0) / g_even_;
    log_c0_ = std::lgamma(0.5 * (n - 1.0)) - std::lgamma(0.5 * (n - 2.0)) -
              0.5 * std::log(std::numbers::pi);
    // log of (n-2) Gamma(n-1) pi Gamma(n-2) / (sqrt(2 pi) Gamma(n-1/2) 2^(n-3)),
    // the x-free part of the closed-form magnitude bound on the series
    kpi_ln_ = std::log(n - 2.0) + std::lgamma(n - 1.0) -
              0.5 * std::log(2.0 * std::numbers::pi) - std::lgamma(n - 0.5) +
              std::log(std::numbers::pi) + std::lgamma(n - 2.0) -
              (n - 3.0) * std::numbers::ln2;
  }

  const DensityParams& params() const noexcept { return p_; }
  const NumericConfig& config() const noexcept { return cfg_; }

  /// sum_k Gamma^2((n+k-1)/2) x^k / k!, scaled. Terms are generated by the
  /// ratio recurrence t_{k+1}/t_k = g_k^2 x/(k+1) with
  /// g_k = Gamma((n+k)/2)/Gamma((n+k-1)/2), g_{k+2} = g_k (n+k)/(n+k-1),
  /// so the hot loop is multiplications only. Truncates when the term and
  /// its geometric tail bound (ratio bound q = |x|(n+k)/(2(k+1)), decreasing
  /// in k) drop below series_tol relative to the partial sum.
  detail::Scaled series(double x) const {
    const double n = p_.n;
    const double tol = cfg_.series_tol;
    double scale = log_t0_;
    double term = 1.0;  // t_k / exp(scale)
    double sum = 0.0;
    double ge = g_even_, go = g_odd_;
    double peak = 1.0;  // largest |term| at the current scale

    for (int k = 0; k < cfg_.series_max_terms; ++k) {
      sum += term;
      const double g = (k % 2 == 0) ? ge : go;
      if (k % 2 == 0)
        ge *= (n + k) / (n + k - 1.0);
      else
        go *= (n + k) / (n + k - 1.0);
      term *= g * g * x / (k + 1.0);

      const double at = std::fabs(term);
      if (at > peak) peak = at;

      const double asum = std::fabs(sum);
      if (at <= tol * asum) {
        const double q = std::fabs(x) * (n + k + 1.0) / (2.0 * (k + 2.0));
        if (q < 1.0 && at * q / (1.0 - q) <= tol * asum)
          return {sum, scale};
      }
      // cancellation floor: the accumulated roundoff is already ~eps * peak,
      // so once terms sit below 1e-20 * peak the geometric tail they head
      // cannot move the computed sum; binding only for alternating input
      // where the relative criterion stalls on a cancelled partial sum
      if (at < peak * 1e-20) return {sum, scale};

      if (at > 1e250) {
        const double shift = std::log(at);
        const double down = std::exp(-shift);
        term *= down;
        sum *= down;
        peak *= down;
        scale += shift;
      }
    }
    throw ConvergenceError(
        "density series: no convergence within " +
            std::to_string(cfg_.series_max_terms) + " terms (scaled partial " +
            std::to_string(sum) + ", exp offset " + std::to_string(scale) + ")",
        sum, std::fabs(term), cfg_.series_max_terms);
  }

  /// p(r|rho); +infinity at r = +-1 when n < 4 (integrable singularity),
  /// degenerate point mass reported as +infinity at r = rho when |rho| = 1.
  double density(double r) const {
    if (!(std::fabs(r) <= 1))
      throw DomainError("pearson_density: require -1 <= r <= 1");
    const double n = p_.n;
    if (std::fabs(p_.rho) == 1.0)
      return r == p_.rho ? std::numeric_limits<double>::infinity() : 0.0;

    if (std::fabs(r) == 1.0 && n != 4.0) {
      if (n < 4.0) return std::numeric_limits<double>::infinity();
      return 0.0;
    }
    const double le = (n == 4.0) ? 0.0 : 0.5 * (n - 4.0) * detail::log1m_sq(r);
    if (p_.rho == 0.0) return std::exp(log_c0_ + le);

    const detail::Scaled s = series(2.0 * p_.rho * r);
    if (!(s.mantissa > 0)) return 0.0;  // alternating-sum noise floor
    return s.mantissa * std::exp(log_norm_ + le + s.exponent);
  }

  /// Integrand of the CDF after the substitution r = sin(theta):
  /// p(sin theta|rho) cos(theta), with (1-r^2)^((n-4)/2) dr folded into
  /// cos^(n-3)(theta). Smooth on the closed interval for n >= 3.
  ///
  /// Quadrature needs only absolute accuracy, so integrand values provably
  /// below quad_tol * 1e-4 are skipped through a log-space bound on the
  /// largest series term; near +-1 those negligible evaluations would
  /// otherwise dominate the term budget (ratio |2 rho r| -> 2).
  double density_theta(double theta) const {
    const double n = p_.n;
    const double c = std::cos(theta);
    const double lc = (n == 3.0) ? 0.0 : (n - 3.0) * std::log(c);
    if (p_.rho == 0.0) return std::exp(log_c0_ + lc);

    const double x = 2.0 * p_.rho * std::sin(theta);
    const double ax = std::fabs(x);
    double bound_ln;
    if (x <= 0.0) {
      // alternating sum: |S(x)| = S_closed(x) <= 1.2 * (1-x/2)^(3/2-n) * C,
      // from 2F1(1/2,1/2;n-1/2;(2+x)/4) <= 2F1(1/2,1/2;3/2;1/2) < 1.2
      bound_ln = kpi_ln_ + (1.5 - n) * std::log1p(-0.5 * x) + 0.2;
    } else {
      // positive terms: the sum is within e^16 of its largest term
      bound_ln = log_t0_ + 16.0;
      if (ax > 2.0 / n && ax < 2.0) {
        const double kpeak = (n * ax - 2.0) / (2.0 - ax);
        bound_ln = 2.0 * std::lgamma(0.5 * (n + kpeak - 1.0)) -
                   std::lgamma(kpeak + 1.0) + kpeak * std::log(ax) + 16.0;
      }
    }
    if (log_norm_ + lc + bound_ln < std::log(cfg_.quad_tol) - 9.2) return 0.0;

    const detail::Scaled s = series(x);
    if (!(s.mantissa > 0)) return 0.0;
    return s.mantissa * std::exp(log_norm_ + lc + s.exponent);
  }

  /// integral of p(r|rho) over [r_lo, r_hi], unclamped
  double integral(double r_lo, double r_hi) const {
    if (std::fabs(p_.rho) == 1.0)  // point mass at rho
      return (r_lo <= p_.rho && p_.rho <= r_hi) ? 1.0 : 0.0;
    r_lo = std::max(r_lo, -1.0);
    r_hi = std::min(r_hi, 1.0);
    if (!(r_hi > r_lo)) return 0.0;

    // seed splits around the density bulk so a spike well inside a wide
    // panel is sampled before the first error estimate is trusted
    std::vector<double> splits;
    const double width = (1.0 - p_.rho * p_.rho) / std::sqrt(p_.n);
    for (double m : {-30.0, -8.0, -2.0, 0.0, 2.0, 8.0, 30.0}) {
      const double r = p_.rho + m * width;
      if (r > r_lo && r < r_hi) splits.push_back(std::asin(r));
    }
    return integrate_adaptive([this](double t) { return density_theta(t); },
                              std::asin(r_lo), std::asin(r_hi), cfg_.quad_tol,
                              splits);
  }

  /// F(x|rho) = P(r <= x), clamped into [0,1]
  double cdf(double x) const {
    if (!(std::fabs(x) <= 1))
      throw DomainError("pearson_cdf: require -1 <= x <= 1");
    if (std::fabs(p_.rho) == 1.0) return x >= p_.rho ? 1.0 : 0.0;
    if (x == -1.0) return 0.0;
    return std::clamp(integral(-1.0, x), 0.0, 1.0);
  }

  /// x with F(x|rho) = prob, by monotone bracketing on [-1,1]. The endpoint
  /// values F(-1) = 0 and F(1) = 1 are known analytically and not evaluated.
  double quantile(double prob) const {
    if (!(prob > 0.0) || !(prob < 1.0))
      throw DomainError("pearson_quantile: require probability in (0,1)");
    if (std::fabs(p_.rho) == 1.0) return p_.rho;
    return solve_bracketed([this, prob](double x) { return cdf(x) - prob; },
                           -1.0, 1.0, -prob, 1.0 - prob, cfg_.root_tol,
                           cfg_.quad_tol, cfg_.max_iter, "pearson_quantile");
  }

 private:
  DensityParams p_;
  NumericConfig cfg_;
  double log_norm_;  // log of 2^(n-3)/(pi Gamma(n-2)) (1-rho^2)^((n-1)/2)
  double log_t0_;    // log Gamma^2((n-1)/2), the k = 0 series term
  double g_even_;    // Gamma(n/2) / Gamma((n-1)/2)
  double g_odd_;     // Gamma((n+1)/2) / Gamma(n/2)
  double log_c0_;    // log of the rho = 0 constant
  double kpi_ln_;    // x-free factor of the alternating-sum bound
};

/// p(r|rho) for a single abscissa.
inline double pearson_density(double r, const DensityParams& params,
                              const NumericConfig& cfg = {}) {
  return DensityEvaluator(params, cfg).density(r);
}

/// p(r|rho) over an array expression of abscissae.
template <typename Derived>
Eigen::ArrayXd pearson_density(const Eigen::ArrayBase<Derived>& r,
                               const DensityParams& params,
                               const NumericConfig& cfg = {}) {
  DensityEvaluator ev(params, cfg);
  Eigen::ArrayXd out(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) out[i] = ev.density(r[i]);
  return out;
}

/// F(x|rho) = integral of p from -1 to x, within cfg.quad_tol.
inline double pearson_cdf(double x, const DensityParams& params,
                          const NumericConfig& cfg = {}) {
  return DensityEvaluator(params, cfg).cdf(x);
}

/// Unclamped mass of p(r|rho) on [r_lo, r_hi].
inline double integrate_density(const DensityParams& params,
                                const NumericConfig& cfg, double r_lo,
                                double r_hi) {
  return DensityEvaluator(params, cfg).integral(r_lo, r_hi);
}

/// x with F(x|rho) = p, to cfg.root_tol / cfg.quad_tol.
inline double pearson_quantile(double p, const DensityParams& params,
                               const NumericConfig& cfg = {}) {
  return DensityEvaluator(params, cfg).quantile(p);
}

/// Second-order mean approximation E[r] = rho (1 - (1-rho^2)/(2n)).
inline double mean_approx(const DensityParams& params) {
  params.validate();
  return params.rho * (1.0 - (1.0 - params.rho * params.rho) / (2.0 * params.n));
}

}  // namespace corrbias
