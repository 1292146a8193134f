#include "corrbias/density.hpp"

#include <cmath>
#include <limits>

#include "doctest.h"
#include "oracle_density.hpp"

using namespace corrbias;

namespace {

// (r, rho, n, p, F) frozen from a 40-digit reference evaluation of the
// hypergeometric closed form with exact quadrature
struct Spot {
  double r, rho, n, p, F;
};
constexpr Spot kSpots[] = {
    {0.0, 0.0, 20, 1.6692352294921875, 0.5},
    {0.3, 0.5, 20, 1.0330510638816036, 0.14446636192418839},
    {-0.5, 0.5, 20, 1.7479413680103296e-4, 8.7839826416410803e-6},
    {0.7, 0.9, 10, 0.38945305092031549, 0.034760363894647981},
    {-0.3, -0.8, 10, 0.085907441818814163, 0.98755364404253528},
    {0.2, 0.3, 5, 0.64276403469475178, 0.39863624180318054},
    {0.6, -0.4, 7, 0.078492156789671494, 0.98856768721552054},
    {0.9, 0.9, 100, 20.754385176422442, 0.481846808039373},
    {0.0, 0.6, 4, 0.256, 0.14237848993264704},
    {-0.6, 0.2, 3.5, 0.35111857681082619, 0.16723337954648635},
    {0.4, 0.0, 3, 0.34730455902142831, 0.63098988043445462},
    {-0.8, -0.5, 3, 0.88347685583500939, 0.41137268540213507},
};

}  // namespace

TEST_CASE("density matches the hypergeometric reference at spot values") {
  for (const Spot& s : kSpots) {
    CAPTURE(s.r);
    CAPTURE(s.rho);
    CAPTURE(s.n);
    const double p = pearson_density(s.r, {s.n, s.rho});
    CHECK(p == doctest::Approx(s.p).epsilon(1e-10));
    // same value from the live test oracle, so the frozen table stays honest
    CHECK(oracle::ref_density(s.r, s.rho, s.n) ==
          doctest::Approx(s.p).epsilon(1e-12));
  }
}

TEST_CASE("cdf matches the frozen reference and the live Simpson oracle") {
  for (const Spot& s : kSpots) {
    CAPTURE(s.r);
    CAPTURE(s.rho);
    CAPTURE(s.n);
    const double F = pearson_cdf(s.r, {s.n, s.rho});
    CHECK(F == doctest::Approx(s.F).epsilon(5e-9));
    CHECK(std::fabs(F - s.F) < 5e-10);
    if (s.n >= 4)  // Simpson oracle needs a bounded integrand
      CHECK(std::fabs(oracle::ref_cdf(s.r, s.rho, s.n) - s.F) < 1e-9);
  }
}

TEST_CASE("rho = 0, n = 4 density is uniform 1/2") {
  const DensityParams params{4, 0.0};
  for (int i = 0; i <= 100; ++i) {
    const double r = -1.0 + 0.02 * i;
    CHECK(std::fabs(pearson_density(r, params) - 0.5) < 1e-12);
  }
}

TEST_CASE("alternating series keeps absolute accuracy under cancellation") {
  // 2 rho r = -1.08; the true value sits ~1e10 below the positive-term peak
  const double p = pearson_density(0.9, {20, -0.6});
  CHECK(p == doctest::Approx(1.3821751511111542e-11).epsilon(1e-4));
  CHECK(pearson_density(0.985, {20, -0.97}) >= 0.0);  // noise floor clamps
}

TEST_CASE("reflection symmetry p(r|rho) = p(-r|-rho)") {
  const NumericConfig cfg;
  for (double rho : {0.5, -0.8, 0.3}) {
    DensityEvaluator a({20, rho}, cfg);
    DensityEvaluator b({20, -rho}, cfg);
    for (int i = 0; i <= 100; ++i) {
      const double r = -1.0 + 0.02 * i;
      CHECK(std::fabs(a.density(r) - b.density(-r)) <=
            1e-12 * std::max(1.0, a.density(r)));
    }
  }
}

TEST_CASE("normalization over the full parameter grid") {
  const NumericConfig cfg;
  for (double n : {3.0, 4.0, 5.0, 20.0, 100.0})
    for (double rho : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
      CAPTURE(n);
      CAPTURE(rho);
      const double mass = integrate_density({n, rho}, cfg, -1.0, 1.0);
      CHECK(std::fabs(mass - 1.0) < 1e-8);
    }
}

TEST_CASE("cdf endpoints and midpoint symmetry") {
  const DensityParams params{20, 0.0};
  CHECK(pearson_cdf(-1.0, params) == 0.0);
  CHECK(std::fabs(pearson_cdf(1.0, params) - 1.0) < 1e-10);
  CHECK(std::fabs(pearson_cdf(0.0, params) - 0.5) < 1e-10);
  CHECK(std::fabs(pearson_cdf(1.0, {20, 0.7}) - 1.0) < 1e-10);
}

TEST_CASE("cdf is monotone in x and strictly decreasing in rho") {
  const NumericConfig cfg;
  for (double rho : {-0.5, 0.0, 0.6}) {
    DensityEvaluator ev({20, rho}, cfg);
    double prev = -1.0;
    for (int i = 0; i <= 40; ++i) {
      const double F = ev.cdf(-1.0 + 0.05 * i);
      CHECK(F >= prev - 1e-12);
      prev = F;
    }
  }
  for (double x : {-0.5, 0.0, 0.4, 0.9}) {
    double prev = 2.0;
    for (double rho : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
      const double F = pearson_cdf(x, {20, rho});
      CHECK(F < prev);
      prev = F;
    }
  }
}

TEST_CASE("density mode sits on the same side as rho") {
  for (double rho : {0.5, 0.8, -0.5, -0.8}) {
    DensityEvaluator ev({20, rho});
    double best_r = -0.999, best_p = 0.0;
    for (int i = 0; i <= 400; ++i) {
      const double r = -0.999 + i * (1.998 / 400);
      const double p = ev.density(r);
      if (p > best_p) {
        best_p = p;
        best_r = r;
      }
    }
    CHECK((rho > 0 ? best_r > 0 : best_r < 0));
  }
}

TEST_CASE("quantile inverts the cdf") {
  const DensityParams params{20, 0.0};
  CHECK(std::fabs(pearson_quantile(0.5, params)) < 1e-9);
  CHECK(pearson_quantile(0.05, params) ==
        doctest::Approx(-0.37834086104351939).epsilon(1e-7));

  // round trips, both directions
  const DensityParams skew{20, 0.5};
  const double F0 = pearson_cdf(0.3, skew);
  CHECK(std::fabs(pearson_quantile(F0, skew) - 0.3) < 1e-7);
  for (double p : {0.05, 0.3, 0.5, 0.9}) {
    const double x = pearson_quantile(p, skew);
    CHECK(std::fabs(pearson_cdf(x, skew) - p) < 1e-9);
  }
}

TEST_CASE("mean approximation") {
  CHECK(mean_approx({20, 0.0}) == 0.0);
  CHECK(mean_approx({20, 1.0}) == 1.0);
  CHECK(mean_approx({20, 0.5}) == doctest::Approx(0.490625).epsilon(1e-15));
}

TEST_CASE("endpoint behavior across n") {
  CHECK(pearson_density(1.0, {3.5, 0.2}) ==
        std::numeric_limits<double>::infinity());
  CHECK(pearson_density(-1.0, {3.0, 0.0}) ==
        std::numeric_limits<double>::infinity());
  CHECK(pearson_density(1.0, {20, 0.5}) == 0.0);
  // n = 4 endpoints stay finite: 2/pi (1-rho^2)^{3/2} S(2 rho)
  const double p = pearson_density(1.0, {4, 0.3});
  CHECK(p > 0.0);
  CHECK(p == doctest::Approx(oracle::ref_density(1.0, 0.3, 4)).epsilon(1e-10));
}

TEST_CASE("degenerate |rho| = 1 reduces to a point mass") {
  CHECK(pearson_density(0.3, {20, 1.0}) == 0.0);
  CHECK(pearson_density(1.0, {20, 1.0}) ==
        std::numeric_limits<double>::infinity());
  CHECK(pearson_cdf(0.999, {20, 1.0}) == 0.0);
  CHECK(pearson_cdf(1.0, {20, 1.0}) == 1.0);
  CHECK(pearson_cdf(-1.0, {20, -1.0}) == 1.0);
}

TEST_CASE("parameter domain errors") {
  CHECK_THROWS_AS(pearson_density(0.0, {2.0, 0.0}), DomainError);
  CHECK_THROWS_AS(pearson_density(0.0, {20, 1.5}), DomainError);
  CHECK_THROWS_AS(pearson_density(1.2, {20, 0.0}), DomainError);
  CHECK_THROWS_AS(pearson_cdf(-1.0001, {20, 0.0}), DomainError);
  CHECK_THROWS_AS(pearson_quantile(0.0, {20, 0.0}), DomainError);
  CHECK_THROWS_AS(pearson_quantile(1.0, {20, 0.0}), DomainError);
  NumericConfig bad;
  bad.series_tol = -1;
  CHECK_THROWS_AS(pearson_density(0.0, {20, 0.0}, bad), DomainError);
}

TEST_CASE("series cap raises a convergence error with payload") {
  NumericConfig tight;
  tight.series_max_terms = 3;
  try {
    pearson_density(0.9, {20, 0.9}, tight);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.iterations() == 3);
    CHECK(std::isfinite(e.partial()));
    CHECK(e.tail_bound() > 0.0);
  }
}

TEST_CASE("array overload agrees with scalar evaluation") {
  const DensityParams params{10, 0.4};
  Eigen::ArrayXd grid = Eigen::ArrayXd::LinSpaced(11, -0.9, 0.9);
  Eigen::ArrayXd vals = pearson_density(grid, params);
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    CHECK(vals[i] == pearson_density(grid[i], params));
}
