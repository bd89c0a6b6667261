#include <doctest.h>

#include <cmath>

#include "pvqmle/filters.hpp"

using namespace pvq;

TEST_CASE("INAR(1) filter matches the closed form") {
  const TimeSeries y({2, 4, 1, 0, 3}, SampleSpace::Counts);
  Eigen::VectorXd theta(4);
  theta << 1.5, 0.4, 2.0, 0.3;
  const FilteredPaths p = run_filter(FilterFamily::inar(1), theta, y, DerivLevel::Grad);
  CHECK(p.valid_from == 1);
  for (int t = 1; t < 5; ++t) {
    CHECK(p.lambda(t) == doctest::Approx(1.5 + 0.4 * y[t - 1]));
    CHECK(p.nu_star(t) == doctest::Approx(2.0 + 0.3 * y[t - 1]));
    CHECK(p.dlambda(1, t) == doctest::Approx(y[t - 1]));
    CHECK(p.dnu(3, t) == doctest::Approx(y[t - 1]));
    CHECK(p.dlambda(2, t) == 0.0);
  }
  CHECK_FALSE(p.has_curvature());
}

TEST_CASE("INGARCH recursion starts at the sample mean") {
  const TimeSeries y({2, 4, 1, 0, 3}, SampleSpace::Counts);
  Eigen::VectorXd theta(6);
  theta << 0.5, 0.3, 0.4, 0.8, 0.2, 0.5;
  const FilteredPaths p = run_filter(FilterFamily::ingarch(), theta, y, DerivLevel::None);
  double lam = y.mean(), mu = y.mean();
  for (int t = 1; t < 5; ++t) {
    lam = 0.5 + 0.3 * y[t - 1] + 0.4 * lam;
    mu = 0.8 + 0.2 * y[t - 1] + 0.5 * mu;
    CHECK(p.lambda(t) == doctest::Approx(lam));
    CHECK(p.nu_star(t) == doctest::Approx(mu));
  }
}

TEST_CASE("beta pseudo-variance is mu(1-mu)/(1+phi)") {
  const TimeSeries y({0.3, 0.5, 0.4, 0.6}, SampleSpace::UnitInterval);
  Eigen::VectorXd theta(7);
  theta << 0.1, 0.2, 0.5, 0.05, 0.3, 0.4, 9.0;
  const FilteredPaths p = run_filter(FilterFamily::beta(), theta, y, DerivLevel::None);
  double mu = y.mean();
  for (int t = 1; t < 4; ++t) {
    mu = 0.05 + 0.3 * y[t - 1] + 0.4 * mu;
    CHECK(p.nu_star(t) == doctest::Approx(mu * (1 - mu) / 10.0));
  }
  CHECK_THROWS_AS(run_filter(FilterFamily::beta(), theta, TimeSeries({1, 2, 3}, SampleSpace::Counts), DerivLevel::None),
                  Error);
}

TEST_CASE("filter derivatives match finite differences") {
  const TimeSeries y({2, 4, 1, 0, 3, 5, 2, 2}, SampleSpace::Counts);
  Eigen::VectorXd theta(6);
  theta << 0.5, 0.3, 0.4, 0.8, 0.2, 0.5;
  const FilterFamily f = FilterFamily::ingarch();
  const FilteredPaths p = run_filter(f, theta, y, DerivLevel::GradHess);
  REQUIRE(p.has_curvature());
  const double h = 1e-6;
  for (int i = 0; i < 6; ++i) {
    Eigen::VectorXd tp = theta, tm = theta;
    tp(i) += h;
    tm(i) -= h;
    const FilteredPaths pp = run_filter(f, tp, y, DerivLevel::Grad), pm = run_filter(f, tm, y, DerivLevel::Grad);
    for (int t = 1; t < y.size(); ++t) {
      CHECK(p.dlambda(i, t) == doctest::Approx((pp.lambda(t) - pm.lambda(t)) / (2 * h)).epsilon(1e-6));
      CHECK(p.dnu(i, t) == doctest::Approx((pp.nu_star(t) - pm.nu_star(t)) / (2 * h)).epsilon(1e-6));
      for (int j = 0; j < 6; ++j) {
        const double fd = (pp.dlambda(j, t) - pm.dlambda(j, t)) / (2 * h);
        CHECK(p.d2lambda[t](i, j) == doctest::Approx(fd).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("pseudo-variance floor sets the clamp flag") {
  const TimeSeries y({0, 0, 0, 1}, SampleSpace::Counts);
  Eigen::VectorXd theta(4);
  theta << 1.0, 0.5, 1e-12, 0.0;
  const FilteredPaths p = run_filter(FilterFamily::inar(1), theta, y, DerivLevel::Grad);
  CHECK(p.clamped);
  CHECK(p.nu_star(1) == kPseudoVarianceFloor);
  CHECK(p.dnu.col(1).norm() == 0.0);
}
