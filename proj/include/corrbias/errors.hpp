#pragma once

#include <stdexcept>
#include <string>

namespace corrbias {

/// Parameter outside its mathematical domain (|rho|>1, n<=2, probability
/// outside (0,1), value outside the image of a transform, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative scheme (series summation, adaptive quadrature, root
/// bracketing) hit its cap before reaching the requested tolerance.
/// Carries the partial result and the residual/tail bound at abort time.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double partial, double tail_bound,
                   long iterations)
      : std::runtime_error(what),
        partial_(partial),
        tail_bound_(tail_bound),
        iterations_(iterations) {}

  double partial() const noexcept { return partial_; }
  double tail_bound() const noexcept { return tail_bound_; }
  long iterations() const noexcept { return iterations_; }

 private:
  double partial_;
  double tail_bound_;
  long iterations_;
};

/// Sample with (numerically) zero variance in a coordinate, or too short.
class DegenerateSampleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inverse requested at a point where the map collapses an interval
/// (the b=1 shrink maps all of [-1,0) onto the single point 0).
class NonInvertibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace corrbias
