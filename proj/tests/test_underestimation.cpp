#include "corrbias/underestimation.hpp"

#include <cmath>

#include "doctest.h"

using namespace corrbias;

TEST_CASE("identity underestimation against frozen references") {
  CHECK(prob_underestimation(Identity{}, 0.0, 20) ==
        doctest::Approx(0.5).epsilon(1e-9));
  CHECK(prob_underestimation(Identity{}, 0.5, 20) ==
        doctest::Approx(0.47646239813611431).epsilon(1e-8));
  CHECK(prob_underestimation(Identity{}, 0.3, 20) ==
        doctest::Approx(0.48589322588583785).epsilon(1e-8));
}

TEST_CASE("affine map probability, cutoff included") {
  CHECK(prob_underestimation(AffineTowardOne{0.238}, 0.0, 20) ==
        doctest::Approx(0.09000886758067272).epsilon(1e-8));
  // below the image floor 2a-1 the probability vanishes
  CHECK(prob_underestimation(AffineTowardOne{0.5}, -0.2, 20) == 0.0);
  CHECK(prob_underestimation(AffineTowardOne{0.0}, 0.3, 20) ==
        prob_underestimation(Identity{}, 0.3, 20));
}

TEST_CASE("negative shrink probability") {
  CHECK(prob_underestimation(NegativeShrink{0.7}, -0.2, 20) ==
        doctest::Approx(0.00757600225766498).epsilon(1e-7));
  CHECK(prob_underestimation(NegativeShrink{0.7}, -0.31, 20) == 0.0);
  // at rho = b-1 the inverse hits the left edge; only rounding residue left
  CHECK(prob_underestimation(NegativeShrink{0.7}, -0.3, 20) < 1e-100);
  CHECK(prob_underestimation(NegativeShrink{1.0}, -0.1, 20) == 0.0);
  // above zero every b gives the plain estimator
  for (double b : {0.0, 0.01, 0.5, 0.95, 1.0})
    CHECK(prob_underestimation(NegativeShrink{b}, 0.4, 20) ==
          prob_underestimation(Identity{}, 0.4, 20));
}

TEST_CASE("upward shift probability in the vanishing-eps limit") {
  CHECK(prob_underestimation(UpwardShift{0.21, 1e-6}, 0.0, 20) ==
        doctest::Approx(0.18709682819760929).epsilon(1e-8));
  CHECK(prob_underestimation(UpwardShift{0.21, 1e-6}, -0.85, 20) == 0.0);
  CHECK(prob_underestimation(UpwardShift{0.0, 1e-6}, 0.3, 20) ==
        prob_underestimation(Identity{}, 0.3, 20));
}

TEST_CASE("quantile estimator keeps the underestimation level constant") {
  for (double alpha : {0.5, 0.95}) {
    for (double n : {5.0, 20.0}) {
      for (double rho : {-0.7, 0.0, 0.6}) {
        CAPTURE(alpha);
        CAPTURE(n);
        CAPTURE(rho);
        const double p =
            prob_underestimation(QuantileBias{alpha, n}, rho, n);
        CHECK(std::fabs(p - (1.0 - alpha)) <= 1e-6);
      }
    }
  }
}

TEST_CASE("probability decreases as the intercept parameters grow") {
  NumericConfig cfg;
  cfg.quad_tol = 1e-11;
  for (double rho : {-0.6, -0.1, 0.2, 0.7}) {
    double prev = 2.0;
    for (double a : {0.0, 0.01, 0.05, 0.1, 0.238, 0.5}) {
      const double p = prob_underestimation(AffineTowardOne{a}, rho, 20, cfg);
      CHECK(p <= prev + 2e-10);
      prev = p;
    }
    prev = 2.0;
    for (double c : {0.0, 0.01, 0.1, 0.21, 0.3}) {
      const double p =
          prob_underestimation(UpwardShift{c, 1e-6}, rho, 20, cfg);
      CHECK(p <= prev + 2e-10);
      prev = p;
    }
  }
}

TEST_CASE("near-degenerate shrink turns into a step at the origin") {
  const NegativeShrink b95{0.95};
  CHECK(prob_underestimation(b95, -0.5, 20) == 0.0);
  CHECK(prob_underestimation(b95, -0.2, 20) == 0.0);
  CHECK(prob_underestimation(b95, -0.04, 20) < 0.01);
  CHECK(prob_underestimation(b95, 0.1, 20) > 0.4);
}

TEST_CASE("curves: grid handling and pointwise agreement") {
  Eigen::ArrayXd grid(3);
  grid << -0.5, 0.0, 0.5;
  const auto c = underestimation_curve(Identity{}, 20, grid);
  CHECK(c.prob.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(c.prob[i] > 0.0);
    CHECK(c.prob[i] < 1.0);
    CHECK(c.prob[i] == prob_underestimation(Identity{}, grid[i], 20));
  }
  CHECK(c.prob[1] == doctest::Approx(0.5).epsilon(1e-9));

  const auto cq =
      underestimation_curve(QuantileBias{0.99, 20}, 20, grid);
  for (int i = 0; i < 3; ++i)
    CHECK(std::fabs(cq.prob[i] - 0.01) <= 1e-6);

  Eigen::ArrayXd bad(2);
  bad << 0.5, -0.5;
  CHECK_THROWS_AS(underestimation_curve(Identity{}, 20, bad), DomainError);
  bad << -1.0, 0.0;
  CHECK_THROWS_AS(underestimation_curve(Identity{}, 20, bad), DomainError);
  CHECK_THROWS_AS(underestimation_curve(Identity{}, 20, Eigen::ArrayXd()),
                  DomainError);
}

TEST_CASE("zero-parameter transforms reduce to the identity curve") {
  Eigen::ArrayXd grid = Eigen::ArrayXd::LinSpaced(9, -0.8, 0.8);
  const auto base = underestimation_curve(Identity{}, 20, grid);
  const auto ca = underestimation_curve(AffineTowardOne{0.0}, 20, grid);
  const auto cb = underestimation_curve(NegativeShrink{0.0}, 20, grid);
  const auto cc = underestimation_curve(UpwardShift{0.0, 1e-6}, 20, grid);
  for (int i = 0; i < grid.size(); ++i) {
    CHECK(std::fabs(ca.prob[i] - base.prob[i]) < 1e-12);
    CHECK(std::fabs(cb.prob[i] - base.prob[i]) < 1e-12);
    CHECK(std::fabs(cc.prob[i] - base.prob[i]) < 1e-12);
  }
}

TEST_CASE("underestimation domain errors") {
  CHECK_THROWS_AS(prob_underestimation(Identity{}, 1.0, 20), DomainError);
  CHECK_THROWS_AS(prob_underestimation(Identity{}, 0.0, 2.0), DomainError);
  CHECK_THROWS_AS(prob_underestimation(AffineTowardOne{1.0}, 0.0, 20),
                  DomainError);
}
