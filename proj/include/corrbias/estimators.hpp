#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <string>
#include <variant>

#include "corrbias/config.hpp"
#include "corrbias/density.hpp"
#include "corrbias/errors.hpp"
#include "corrbias/normal.hpp"

namespace corrbias {

/// Paired observations, one row per (x,y) draw.
struct BivariateSample {
  Eigen::ArrayX2d xy;

  Eigen::Index n() const noexcept { return xy.rows(); }
  auto x() const { return xy.col(0); }
  auto y() const { return xy.col(1); }

  void validate() const {
    if (xy.rows() < 3)
      throw DegenerateSampleError("BivariateSample: need at least 3 pairs");
  }
};

namespace detail {

template <typename Derived>
bool near_constant(const Eigen::ArrayBase<Derived>& centered, double scale,
                   double count) {
  // variance at the rounding floor of the original magnitudes
  const double eps = std::numeric_limits<double>::epsilon();
  const double floor = count * (16.0 * eps * scale) * (16.0 * eps * scale);
  return centered.square().sum() <= floor;
}

}  // namespace detail

/// Product-moment correlation of two equal-length coordinate arrays.
template <typename DerivedX, typename DerivedY>
double pearson_r(const Eigen::ArrayBase<DerivedX>& x,
                 const Eigen::ArrayBase<DerivedY>& y) {
  if (x.size() != y.size())
    throw DomainError("pearson_r: coordinate lengths differ");
  if (x.size() < 3)
    throw DegenerateSampleError("pearson_r: need at least 3 pairs");
  const auto xc = (x - x.mean()).eval();
  const auto yc = (y - y.mean()).eval();
  const double sxx = xc.square().sum();
  const double syy = yc.square().sum();
  const double cnt = static_cast<double>(x.size());
  if (sxx <= 0.0 || syy <= 0.0 ||
      detail::near_constant(xc, x.abs().maxCoeff(), cnt) ||
      detail::near_constant(yc, y.abs().maxCoeff(), cnt))
    throw DegenerateSampleError("pearson_r: a coordinate is constant");
  const double r = (xc * yc).sum() / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

inline double pearson_r(const BivariateSample& sample) {
  sample.validate();
  return pearson_r(sample.x(), sample.y());
}

// ---------------------------------------------------------------------------
// Biased estimator transforms r_hat -> r_tilde
// ---------------------------------------------------------------------------

struct Identity {};

/// r_tilde = (1-a) r_hat + a, image [2a-1, 1]
struct AffineTowardOne {
  double a;
};

/// r_tilde = (1-b) r_hat on [-1,0), unchanged on [0,1]; b = 1 is the
/// degenerate map sending every negative estimate to 0
struct NegativeShrink {
  double b;
};

/// r_tilde = r_hat + c up to the kink at 1-c-eps, then the rescale
/// (eps r_hat + c)/(eps + c) which fixes r_hat = 1
struct UpwardShift {
  double c;
  double eps = 1e-6;
};

/// r_tilde = G_alpha(r_hat), the solution of F(r_hat|r_tilde) = 1 - alpha
/// for samples of size n
struct QuantileBias {
  double alpha;
  double n;
};

using EstimatorTransform =
    std::variant<Identity, AffineTowardOne, NegativeShrink, UpwardShift,
                 QuantileBias>;

inline void validate_transform(const EstimatorTransform& t) {
  std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, AffineTowardOne>) {
          if (!(v.a >= 0.0) || !(v.a < 1.0))
            throw DomainError("AffineTowardOne: require a in [0,1)");
        } else if constexpr (std::is_same_v<T, NegativeShrink>) {
          if (!(v.b >= 0.0) || !(v.b <= 1.0))
            throw DomainError("NegativeShrink: require b in [0,1]");
        } else if constexpr (std::is_same_v<T, UpwardShift>) {
          if (!(v.c >= 0.0) || !(v.c < 1.0))
            throw DomainError("UpwardShift: require c in [0,1)");
          if (!(v.eps > 0.0))
            throw DomainError("UpwardShift: require eps > 0");
        } else if constexpr (std::is_same_v<T, QuantileBias>) {
          if (!(v.alpha > 0.0) || !(v.alpha < 1.0))
            throw DomainError("QuantileBias: require alpha in (0,1)");
          if (!(v.n > 2.0))
            throw DomainError("QuantileBias: require n > 2");
        }
      },
      t);
}

inline std::string transform_name(const EstimatorTransform& t) {
  struct Namer {
    std::string operator()(const Identity&) const { return "identity"; }
    std::string operator()(const AffineTowardOne&) const { return "affine"; }
    std::string operator()(const NegativeShrink&) const { return "shrink"; }
    std::string operator()(const UpwardShift&) const { return "shift"; }
    std::string operator()(const QuantileBias&) const { return "quantile"; }
  };
  return std::visit(Namer{}, t);
}

/// r_tilde with F(r_hat|r_tilde) = 1 - alpha, solved by monotone bracketing
/// in the distribution parameter (the CDF is strictly decreasing in it).
/// The boundary estimates r_hat = +-1 map to +-1 without solving.
///
/// The bracket grows outward from a Fisher-z seed
/// tanh(atanh(r_hat) + q_alpha/sqrt(n-3)). Probes far past the root toward
/// +-1 would put the density bulk inside the CDF range with series ratio
/// |2 rho r| -> 2, so staying near the root is what keeps every CDF
/// evaluation within the term cap.
inline double quantile_estimator(double r_hat, double alpha, double n,
                                 const NumericConfig& cfg = {}) {
  if (!(std::fabs(r_hat) <= 1))
    throw DomainError("quantile_estimator: require -1 <= r_hat <= 1");
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw DomainError("quantile_estimator: require alpha in (0,1)");
  if (!(n > 2.0)) throw DomainError("quantile_estimator: require n > 2");
  if (std::fabs(r_hat) == 1.0) return r_hat;

  const double target = 1.0 - alpha;
  const double delta = 1e-9;
  const double lo_lim = -1.0 + delta, hi_lim = 1.0 - delta;
  auto f = [&](double rt) {
    return DensityEvaluator({n, rt}, cfg).cdf(r_hat) - target;
  };

  const double zsd = std::sqrt(std::max(n - 3.0, 0.5));
  const double seed_z = std::atanh(r_hat) + normal_quantile(alpha) / zsd;

  // analytic limits: F -> 1 as the parameter tends to -1, F -> 0 toward +1
  double lo = lo_lim, flo = alpha;
  double hi = hi_lim, fhi = -target;
  const double s = std::clamp(std::tanh(seed_z), lo_lim, hi_lim);
  const double fs = f(s);
  if (fs == 0.0) return s;
  double step = 0.4;
  if (fs > 0.0) {
    lo = s;
    flo = fs;
    for (double z = seed_z + step; ; z += step, step *= 2.0) {
      const double cand = std::tanh(z);
      if (cand >= hi_lim || !(cand > lo)) break;
      const double fc = f(cand);
      if (fc < 0.0) {
        hi = cand;
        fhi = fc;
        break;
      }
      lo = cand;
      flo = fc;
    }
  } else {
    hi = s;
    fhi = fs;
    for (double z = seed_z - step; ; z -= step, step *= 2.0) {
      const double cand = std::tanh(z);
      if (cand <= lo_lim || !(cand < hi)) break;
      const double fc = f(cand);
      if (fc > 0.0) {
        lo = cand;
        flo = fc;
        break;
      }
      hi = cand;
      fhi = fc;
    }
  }
  return solve_bracketed(f, lo, hi, flo, fhi, cfg.root_tol, cfg.quad_tol,
                         cfg.max_iter, "quantile_estimator");
}

/// Large-sample closed form of the quantile map,
/// (sqrt(n + 4 q sqrt(n) r_hat + 4 q^2) - sqrt(n)) / (2 q), valid for
/// n > 4 q_alpha^2; evaluated in conjugate form so the q -> 0 limit is
/// exact and the endpoints stay fixed.
inline double quantile_estimator_asymptotic(double r_hat, double alpha,
                                            double n) {
  if (!(std::fabs(r_hat) <= 1))
    throw DomainError(
        "quantile_estimator_asymptotic: require -1 <= r_hat <= 1");
  const double q = normal_quantile(alpha);
  if (!(n > 4.0 * q * q))
    throw DomainError(
        "quantile_estimator_asymptotic: require n > 4 q_alpha^2");
  if (std::fabs(q) < 1e-14) return r_hat;
  const double sn = std::sqrt(n);
  const double inner = n + 4.0 * q * sn * r_hat + 4.0 * q * q;
  return std::clamp(2.0 * (sn * r_hat + q) / (std::sqrt(inner) + sn), -1.0,
                    1.0);
}

/// Apply a transform to an estimate; result always lies in [-1,1].
inline double transform_apply(const EstimatorTransform& t, double r_hat,
                              const NumericConfig& cfg = {}) {
  validate_transform(t);
  if (!(std::fabs(r_hat) <= 1))
    throw DomainError("transform_apply: require -1 <= r_hat <= 1");
  struct Apply {
    double r;
    const NumericConfig& cfg;
    double operator()(const Identity&) const { return r; }
    double operator()(const AffineTowardOne& t) const {
      return (1.0 - t.a) * r + t.a;
    }
    double operator()(const NegativeShrink& t) const {
      return r < 0.0 ? (1.0 - t.b) * r : r;
    }
    double operator()(const UpwardShift& t) const {
      if (r <= 1.0 - t.c - t.eps) return r + t.c;
      return (t.eps * r + t.c) / (t.eps + t.c);
    }
    double operator()(const QuantileBias& t) const {
      return quantile_estimator(r, t.alpha, t.n, cfg);
    }
  };
  return std::clamp(std::visit(Apply{r_hat, cfg}, t), -1.0, 1.0);
}

/// Invert a transform on its image. The degenerate shrink (b = 1) is not
/// invertible at 0; the quantile map inverts through the quantile function,
/// F(r_hat|r_tilde) = 1 - alpha read as r_hat = Q(1-alpha | r_tilde).
inline double transform_inverse(const EstimatorTransform& t, double r_tilde,
                                const NumericConfig& cfg = {}) {
  validate_transform(t);
  if (!(std::fabs(r_tilde) <= 1))
    throw DomainError("transform_inverse: require -1 <= r_tilde <= 1");
  constexpr double slack = 1e-12;  // admits rounded forward-map outputs
  struct Inverse {
    double rt;
    const NumericConfig& cfg;
    double operator()(const Identity&) const { return rt; }
    double operator()(const AffineTowardOne& t) const {
      const double lo = 2.0 * t.a - 1.0;
      if (rt < lo - slack)
        throw DomainError("transform_inverse: value below the affine image");
      return std::clamp((rt - t.a) / (1.0 - t.a), -1.0, 1.0);
    }
    double operator()(const NegativeShrink& t) const {
      if (rt >= 0.0) {
        if (t.b == 1.0 && rt == 0.0)
          throw NonInvertibleError(
              "transform_inverse: b = 1 collapses [-1,0) onto 0");
        return rt;
      }
      if (t.b == 1.0)
        throw DomainError("transform_inverse: negative value outside image");
      if (rt < t.b - 1.0 - slack)
        throw DomainError("transform_inverse: value below the shrink image");
      return std::clamp(rt / (1.0 - t.b), -1.0, 1.0);
    }
    double operator()(const UpwardShift& t) const {
      if (rt < t.c - 1.0 - slack)
        throw DomainError("transform_inverse: value below the shift image");
      if (rt <= 1.0 - t.eps) return std::clamp(rt - t.c, -1.0, 1.0);
      return std::clamp((1.0 + t.c / t.eps) * rt - t.c / t.eps, -1.0, 1.0);
    }
    double operator()(const QuantileBias& t) const {
      if (std::fabs(rt) == 1.0) return rt;
      return pearson_quantile(1.0 - t.alpha, {t.n, rt}, cfg);
    }
  };
  return std::visit(Inverse{r_tilde, cfg}, t);
}

}  // namespace corrbias
