#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include "pvqmle/dgp.hpp"
#include "pvqmle/experiments.hpp"
#include "pvqmle/inference.hpp"
#include "pvqmle/special.hpp"

using namespace pvq;

namespace {

DgpSpec inar1(ThinningSpec t, double omega) {
  DgpSpec d;
  d.model = InarSpec{{t}, Innovation{InnovationKind::Poisson, omega, 0.0}};
  return d;
}

}  // namespace

TEST_CASE("sandwich of identities") {
  const Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);
  const CovarianceResult c = sandwich(I2, I2, 100);
  CHECK((c.sigma - I2).norm() < 1e-14);
  CHECK(c.se(0) == doctest::Approx(0.1));
  CHECK_FALSE(c.psd_flag);
  const CovarianceResult d = sandwich(2.0 * I2, I2, 1);
  CHECK((d.sigma - 0.25 * I2).norm() < 1e-14);
}

TEST_CASE("singular and indefinite H are flagged, not hidden") {
  Eigen::MatrixXd H(2, 2);
  H << 1, 1, 1, 1;
  const CovarianceResult c = sandwich(H, Eigen::MatrixXd::Identity(2, 2), 10);
  CHECK(c.psd_flag);
  CHECK(c.sigma.allFinite());
  H << 1, 0, 0, -1;
  const CovarianceResult d = sandwich(H, Eigen::MatrixXd::Identity(2, 2), 10);
  CHECK(d.indefinite);
  CHECK(d.psd_flag);
}

TEST_CASE("chi-square tail against Boost and closed forms") {
  double worst = 0.0;
  for (int dof = 1; dof <= 20; ++dof) {
    for (double x : {1e-4, 0.1, 0.5, 1.0, 2.5, 3.84, 7.0, 15.0, 30.0, 60.0}) {
      const double ref = boost::math::gamma_q(0.5 * dof, 0.5 * x);
      const double got = chi2_sf(x, dof);
      if (ref > 1e-300) worst = std::max(worst, std::abs(got - ref) / ref);
    }
  }
  CHECK(worst <= 1e-10);
  CHECK(chi2_sf(3.0, 2) == doctest::Approx(std::exp(-1.5)).epsilon(1e-13));
  CHECK(chi2_sf(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-10));
  CHECK(chi2_sf(0.0, 3) == 1.0);
  CHECK(chi2_cdf(4.0, 4) == doctest::Approx(1.0 - std::exp(-2.0) * (1.0 + 2.0)).epsilon(1e-13));
  CHECK(gamma_p(2.5, 1.7) + gamma_q(2.5, 1.7) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(gamma_q(-1.0, 1.0), Error);
}

TEST_CASE("Wald statistic arithmetic") {
  const FilterFamily f = FilterFamily::inar(1);
  const RestrictionSpec pois = RestrictionSpec::parse(f, "poisson");  // r = b - a, R = (0, -1, 0, 1)
  Eigen::VectorXd theta(4);
  theta << 1.0, 0.5, 1.0, 1.0;
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(4, 4);
  sigma(1, 1) = 0.5;
  sigma(3, 3) = 0.5;
  const WaldResult w = wald_statistic(pois, theta, sigma, 100);
  CHECK(w.statistic == doctest::Approx(25.0));
  CHECK(w.dof == 1);
  CHECK(w.p_value == doctest::Approx(chi2_sf(25.0, 1)));
  theta(3) = 0.5;
  const WaldResult z = wald_statistic(pois, theta, sigma, 100);
  CHECK(z.statistic == 0.0);
  CHECK(z.p_value == 1.0);
  CHECK_THROWS_WITH_AS(wald_statistic(pois, theta, Eigen::MatrixXd::Zero(4, 4), 100), doctest::Contains("poisson"),
                       Error);
}

TEST_CASE("four-term restricted covariance equals the reduced sandwich") {
  const TimeSeries y = simulate(inar1(ThinningSpec::negbin(0.6, 2.0), 2.0), 3000, 21);
  for (const char* name : {"binomial", "equidispersed", "geometric+equidispersed"}) {
    const RestrictionSpec spec = RestrictionSpec::parse(FilterFamily::inar(1), name);
    const FitResult fit = fit_pvqmle(FilterFamily::inar(1), y, spec);
    const ObjectiveEval e = evaluate_restricted(spec, fit.reduced_hat, y, EvalLevel::Full);
    const Eigen::MatrixXd direct = sandwich(e).sigma.topLeftCorner(2, 2);
    const Eigen::MatrixXd four = restricted_psi_covariance(e.hessian, e.opg, 2);
    CHECK(((four - direct).array().abs() / direct.array().abs()).maxCoeff() <= 1e-8);
  }
}

TEST_CASE("correct variance: sandwich psi-block matches the inverse Hessian") {
  const TimeSeries y = simulate(inar1(ThinningSpec::binomial(0.85), 3.0), 100000, 22);
  Eigen::VectorXd theta(4);
  theta << 3.0, 0.85, 3.0, 0.85 * 0.15;
  const ObjectiveEval e = evaluate(FilterFamily::inar(1), theta, y, EvalLevel::Full);
  const Eigen::MatrixXd sig = sandwich(e).sigma.topLeftCorner(2, 2);
  const Eigen::MatrixXd hinv = e.hessian.topLeftCorner(2, 2).inverse();
  CHECK(((sig - hinv).array().abs() / hinv.array().abs()).maxCoeff() <= 0.05);
}

TEST_CASE("variance ratio of an estimator to itself is one") {
  const TimeSeries y = simulate(inar1(ThinningSpec::binomial(0.5), 1.0), 5000, 23);
  Eigen::VectorXd theta(4);
  theta << 1.0, 0.5, 1.0, 0.25;
  const CovarianceResult a = sandwich(evaluate(FilterFamily::inar(1), theta, y, EvalLevel::Full));
  CHECK(std::log10(a.sigma(1, 1) / a.sigma(1, 1)) == 0.0);
  const auto rows = variance_ratio_grid({{0.85, 3.0}}, 10000, 1);
  CHECK(rows[0].log10_ratio_a > 0.0);
  CHECK_THROWS_AS(variance_ratio_grid({{1.2, 1.0}}, 1000, 1), Error);
}

TEST_CASE("confidence intervals cover at the nominal rate") {
  const DgpSpec d = inar1(ThinningSpec::binomial(0.85), 3.0);
  const RestrictionSpec r3 = RestrictionSpec::parse(FilterFamily::inar(1), "binomial+equidispersed");
  const int reps = 1000;
  int cover_u = 0, cover_r = 0;
  for (int i = 0; i < reps; ++i) {
    const TimeSeries y = simulate(d, 2000, 9000 + i);
    const FitResult u = fit_pvqmle(FilterFamily::inar(1), y);
    const FitResult r = fit_pvqmle(FilterFamily::inar(1), y, r3);
    const CovarianceResult cu = fit_covariance(u, y), cr = fit_covariance(r, y);
    if (std::abs(u.theta_hat["a"] - 0.85) <= 1.96 * cu.se(1)) ++cover_u;
    if (std::abs(r.theta_hat["a"] - 0.85) <= 1.96 * cr.se(1)) ++cover_r;
  }
  MESSAGE("coverage unrestricted " << cover_u / double(reps) << ", restricted " << cover_r / double(reps));
  CHECK(std::abs(cover_u / double(reps) - 0.95) <= 0.02);
  CHECK(std::abs(cover_r / double(reps) - 0.95) <= 0.02);
}
