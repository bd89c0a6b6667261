#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>
#include <boost/math/distributions/poisson.hpp>

#include "pvqmle/dgp.hpp"
#include "pvqmle/estimate.hpp"
#include "pvqmle/experiments.hpp"
#include "pvqmle/objective.hpp"
#include "pvqmle/optimizer.hpp"
#include "pvqmle/transforms.hpp"

using namespace pvq;

namespace {

DgpSpec inar1(ThinningSpec t, double omega) {
  DgpSpec d;
  d.model = InarSpec{{t}, Innovation{InnovationKind::Poisson, omega, 0.0}};
  return d;
}

}  // namespace

TEST_CASE("BFGS minimizes the Rosenbrock function") {
  DifferentiableFunction f = [](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    const double a = 1.0 - x(0), b = x(1) - x(0) * x(0);
    if (g) {
      g->resize(2);
      (*g) << -2.0 * a - 400.0 * x(0) * b, 200.0 * b;
    }
    return a * a + 100.0 * b * b;
  };
  const BfgsResult r = minimize_bfgs(f, Eigen::Vector2d(-1.2, 1.0), {});
  CHECK(r.converged);
  CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(r.x(1) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("transforms are smooth bijections") {
  for (const CoordinateTransform t : {CoordinateTransform{1e-6, std::numeric_limits<double>::infinity()},
                                      CoordinateTransform{0.0, 0.999}, CoordinateTransform{0.0, 1.0}}) {
    for (double u : {-3.0, -0.2, 0.0, 1.5}) {
      CHECK(t.to_internal(t.to_external(u)) == doctest::Approx(u));
      const double h = 1e-6;
      CHECK(t.derivative(u) == doctest::Approx((t.to_external(u + h) - t.to_external(u - h)) / (2 * h)).epsilon(1e-6));
    }
  }
}

TEST_CASE("CLSE agrees with the normal-equation oracle") {
  const TimeSeries y = simulate(inar1(ThinningSpec::binomial(0.5), 2.0), 50, 8);
  const FitResult r = fit_clse(FilterFamily::inar(1), y);
  Eigen::MatrixXd X(49, 2);
  Eigen::VectorXd z(49);
  for (int t = 1; t < 50; ++t) {
    X(t - 1, 0) = 1.0;
    X(t - 1, 1) = y[t - 1];
    z(t - 1) = y[t];
  }
  const Eigen::VectorXd beta = (X.transpose() * X).inverse() * (X.transpose() * z);
  CHECK((r.theta_hat.psi - beta).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(r.theta_hat.gamma.size() == 0);
}

TEST_CASE("CLSE rejects a constant series") {
  const TimeSeries y(std::vector<double>(30, 2.0), SampleSpace::Counts);
  CHECK_THROWS_WITH_AS(fit_clse(FilterFamily::inar(1), y), doctest::Contains("singular"), Error);
}

TEST_CASE("WLSE with unit weights equals CLSE") {
  const TimeSeries y = simulate(inar1(ThinningSpec::binomial(0.6), 2.0), 300, 9);
  const FitResult w = fit_wlse(FilterFamily::inar(1), y, WlseWeights::true_variance(Eigen::VectorXd::Ones(300)));
  const FitResult c = fit_clse(FilterFamily::inar(1), y);
  CHECK((w.theta_hat.psi - c.theta_hat.psi).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("INAR(1) transition kernel") {
  CHECK(std::exp(inar1_log_transition(0, 0, 0.85, 3.0)) == doctest::Approx(std::exp(-3.0)));
  const boost::math::poisson_distribution<> pois(3.0);
  for (long y = 0; y < 15; ++y)
    CHECK(std::exp(inar1_log_transition(y, 0, 0.85, 3.0)) == doctest::Approx(boost::math::pdf(pois, y)));
  for (long x : {0L, 5L, 30L}) {
    double total = 0.0;
    for (long y = 0; y <= 200; ++y) total += std::exp(inar1_log_transition(y, x, 0.85, 3.0));
    CHECK(std::abs(total - 1.0) < 1e-10);
  }
  double dw = 0.0, da = 0.0;
  inar1_log_transition(7, 6, 0.4, 2.0, &dw, &da);
  const double h = 1e-6;
  CHECK(dw == doctest::Approx((inar1_log_transition(7, 6, 0.4, 2.0 + h) - inar1_log_transition(7, 6, 0.4, 2.0 - h)) /
                              (2 * h)));
  CHECK(da == doctest::Approx((inar1_log_transition(7, 6, 0.4 + h, 2.0) - inar1_log_transition(7, 6, 0.4 - h, 2.0)) /
                              (2 * h)));
}

TEST_CASE("Poisson QMLE satisfies its first-order condition") {
  const TimeSeries y = simulate(inar1(ThinningSpec::binomial(0.5), 2.0), 1000, 10);
  const FitResult r = fit_poisson_qmle(FilterFamily::inar(1), y);
  REQUIRE(r.converged);
  double s0 = 0.0, s1 = 0.0;
  for (int t = 1; t < 1000; ++t) {
    const double lam = r.theta_hat.psi(0) + r.theta_hat.psi(1) * y[t - 1];
    s0 += y[t] / lam - 1.0;
    s1 += (y[t] / lam - 1.0) * y[t - 1];
  }
  CHECK(std::abs(s0) / 999 < 1e-5);
  CHECK(std::abs(s1) / 999 < 1e-5);
}

TEST_CASE("PVQMLE recovers the parameters and is deterministic") {
  const TimeSeries y = simulate(inar1(ThinningSpec::binomial(0.85), 3.0), 5000, 11);
  const FitResult a = fit_pvqmle(FilterFamily::inar(1), y);
  const FitResult b = fit_pvqmle(FilterFamily::inar(1), y);
  REQUIRE(a.converged);
  CHECK(a.grad_norm <= 1e-6);
  CHECK(a.theta_hat.theta() == b.theta_hat.theta());
  CHECK(a.iterations == b.iterations);
  CHECK(a.theta_hat["a"] == doctest::Approx(0.85).epsilon(0.03));
  CHECK(a.theta_hat["omega1"] == doctest::Approx(3.0).epsilon(0.15));

  const ObjectiveEval e = evaluate(FilterFamily::inar(1), a.theta_hat.theta(), y, EvalLevel::Score);
  CHECK(e.score.cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("restricted PVQMLE substitutes the restriction back") {
  const TimeSeries y = simulate(inar1(ThinningSpec::binomial(0.85), 3.0), 2000, 12);
  const RestrictionSpec r3 = RestrictionSpec::parse(FilterFamily::inar(1), "binomial+equidispersed");
  const FitResult r = fit_pvqmle(FilterFamily::inar(1), y, r3);
  REQUIRE(r.converged);
  CHECK(r.tag == EstimatorTag::PVQMLE_R);
  CHECK(r.reduced_hat.size() == 2);
  const double a = r.theta_hat["a"];
  CHECK(r.theta_hat["b"] == doctest::Approx(a * (1 - a)));
  CHECK(r.theta_hat["omega2"] == doctest::Approx(r.theta_hat["omega1"]));
}

TEST_CASE("recursive families converge") {
  DgpSpec d;
  d.model = BetaArSpec{0.05, 0.25, 0.65, 30.0};
  const TimeSeries y = simulate(d, 2000, 13);
  const FitResult r = fit_pvqmle(FilterFamily::beta(), y);
  CHECK(r.converged);
  CHECK(r.theta_hat["alpha1"] == doctest::Approx(0.25).epsilon(0.3));
  const FitResult full = fit_pvqmle(FilterFamily::beta(), y, RestrictionSpec::parse(FilterFamily::beta(), "full"));
  CHECK(full.converged);
  CHECK(full.theta_hat["phi"] == doctest::Approx(30.0).epsilon(0.2));

  const TimeSeries c = simulate(inar1(ThinningSpec::poisson(0.5), 2.0), 1500, 14);
  CHECK(fit_pvqmle(FilterFamily::ingarch(), c).converged);
}

TEST_CASE("unrestricted PVQMLE and true-weight WLSE differ by O(1/T)") {
  const int T = 2000;
  const DgpSpec d = inar1(ThinningSpec::binomial(0.85), 3.0);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const TimeSeries y = simulate(d, T, 500 + rep);
    const FitResult p = fit_pvqmle(FilterFamily::inar(1), y);
    const Eigen::VectorXd w = true_variance_path(std::get<InarSpec>(d.model), y);
    const FitResult wl = fit_wlse(FilterFamily::inar(1), y, WlseWeights::true_variance(w));
    worst = std::max(worst, std::abs(p.theta_hat["a"] - wl.theta_hat.psi(1)));
  }
  MESSAGE("max |a_PVQMLE - a_WLSE| over 100 reps: " << worst);
  CHECK(worst <= 0.5 / T);
}

TEST_CASE("small autoregressive coefficient is estimated near zero") {
  const TimeSeries y = simulate(inar1(ThinningSpec::binomial(0.01), 2.0), 10000, 15);
  const FitResult p = fit_pvqmle(FilterFamily::inar(1), y);
  const FitResult c = fit_clse(FilterFamily::inar(1), y);
  CHECK(p.converged);
  // sd of the CLSE slope is about 1/sqrt(T) = 0.01.
  CHECK(std::abs(p.theta_hat["a"] - 0.01) < 0.02);
  CHECK(std::abs(p.theta_hat["a"] - c.theta_hat.psi(1)) < 0.01);
}
