#pragma once

#include <cmath>

#include "corrbias/errors.hpp"

namespace corrbias {

/// Tolerances and iteration caps shared by the series, quadrature and
/// root-finding layers.
struct NumericConfig {
  double series_tol = 1e-12;    ///< relative tolerance on the density series
  int series_max_terms = 100000;
  double quad_tol = 1e-10;      ///< absolute tolerance on CDF integrals
  double root_tol = 1e-10;      ///< absolute tolerance on solved abscissae
  int max_iter = 200;           ///< root-finder iteration cap

  void validate() const {
    if (!(series_tol > 0) || !(quad_tol > 0) || !(root_tol > 0))
      throw DomainError("NumericConfig: tolerances must be positive");
    if (series_max_terms < 1 || max_iter < 1)
      throw DomainError("NumericConfig: iteration caps must be >= 1");
  }
};

/// Sample size n and population correlation rho parameterizing the sampling
/// density of the correlation estimator. n may be any real > 2.
struct DensityParams {
  double n;
  double rho;

  void validate() const {
    if (!std::isfinite(n) || !(n > 2))
      throw DomainError("DensityParams: require sample size n > 2");
    if (!std::isfinite(rho) || std::fabs(rho) > 1)
      throw DomainError("DensityParams: require -1 <= rho <= 1");
  }
};

}  // namespace corrbias
