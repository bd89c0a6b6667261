#include <doctest.h>

#include <cmath>

#include "pvqmle/family.hpp"
#include "pvqmle/restriction.hpp"
#include "pvqmle/series.hpp"

using namespace pvq;

TEST_CASE("csv parsing skips a header and validates counts") {
  const TimeSeries y = parse_csv("y\n1\n2\n0\n5\n", SampleSpace::Counts);
  CHECK(y.size() == 4);
  CHECK(y[3] == 5.0);
  CHECK(y.mean() == doctest::Approx(2.0));
  CHECK(y.stddev() == doctest::Approx(std::sqrt(14.0 / 3.0)));
}

TEST_CASE("csv errors carry the row number") {
  try {
    parse_csv("1\n2\n-1\n", SampleSpace::Counts);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(e.row() == 3);
  }
  CHECK_THROWS_AS(parse_csv("1\n2.5\n", SampleSpace::Counts), DataError);
  CHECK_THROWS_AS(parse_csv("0.2\n1.0\n", SampleSpace::UnitInterval), DataError);
  CHECK_THROWS_AS(parse_csv("0.2\nabc\n", SampleSpace::UnitInterval), DataError);
  CHECK_THROWS_AS(parse_csv("3\n", SampleSpace::Counts), Error);
}

TEST_CASE("csv round trip and rescaling") {
  const TimeSeries y({3, 0, 7}, SampleSpace::Counts);
  CHECK(parse_csv(to_csv(y), SampleSpace::Counts) == y);
  const TimeSeries r = rescale_to_unit(TimeSeries({-0.5, 0.0, 0.5}, SampleSpace::Reals), -1.0, 1.0);
  CHECK(r[0] == doctest::Approx(0.25));
  CHECK(r[2] == doctest::Approx(0.75));
  CHECK_THROWS_AS(rescale_to_unit(TimeSeries({-1.0, 0.0}, SampleSpace::Reals), -1.0, 1.0), DataError);
}

TEST_CASE("family layouts") {
  CHECK(FilterFamily::inar(1).coordinate_names() == std::vector<std::string>{"omega1", "a", "omega2", "b"});
  CHECK(FilterFamily::inar(2).coordinate_names() ==
        std::vector<std::string>{"omega1", "a1", "a2", "omega2", "b1", "b2"});
  CHECK(FilterFamily::ingarch().size() == 6);
  CHECK(FilterFamily::beta().size() == 7);
  CHECK(FilterFamily::beta().index_of("phi") == 6);
  CHECK(FilterFamily::parse("inar2") == FilterFamily::inar(2));
  CHECK(FilterFamily::inar(2).first_usable() == 2);
  CHECK(FilterFamily::ingarch().first_usable() == 1);
  CHECK_THROWS_AS(FilterFamily::parse("arma"), Error);
}

TEST_CASE("param vector and admissibility") {
  const FilterFamily f = FilterFamily::inar(1);
  Eigen::VectorXd theta(4);
  theta << 3.0, 0.85, 3.0, 0.1275;
  const ParamVector pv = ParamVector::from_theta(f, theta);
  CHECK(pv["b"] == doctest::Approx(0.1275));
  CHECK(pv.theta() == theta);
  CHECK(is_admissible(f, theta));
  theta(0) = -1.0;
  CHECK_FALSE(is_admissible(f, theta));
  CHECK_THROWS_AS(validate_params(f, theta), Error);
  Eigen::VectorXd beta(7);
  beta << 0.2, 0.4, 0.5, 0.1, 0.1, 0.1, 10.0;  // omega + alpha + beta >= 1
  CHECK_FALSE(is_admissible(FilterFamily::beta(), beta));
}

TEST_CASE("link derivatives match finite differences") {
  for (Link link : {Link::Identity, Link::Binomial, Link::Geometric}) {
    const double x = 0.37, h = 1e-6;
    const double d1 = (link_value(link, x + h) - link_value(link, x - h)) / (2 * h);
    const double d2 = (link_derivative(link, x + h) - link_derivative(link, x - h)) / (2 * h);
    CHECK(link_derivative(link, x) == doctest::Approx(d1).epsilon(1e-8));
    CHECK(link_second_derivative(link, x) == doctest::Approx(d2).epsilon(1e-6));
  }
}

TEST_CASE("restriction expand, reduce and residual") {
  const FilterFamily f = FilterFamily::inar(1);
  const RestrictionSpec r3 = RestrictionSpec::parse(f, "binomial+equidispersed");
  CHECK(r3.count() == 2);
  CHECK(r3.reduced_size() == 2);
  Eigen::VectorXd red(2);
  red << 3.0, 0.85;
  const Eigen::VectorXd theta = r3.expand(red);
  CHECK(theta(2) == doctest::Approx(3.0));
  CHECK(theta(3) == doctest::Approx(0.85 * 0.15));
  CHECK(r3.residual(theta).norm() == doctest::Approx(0.0));
  CHECK(r3.reduce(theta) == red);

  const RestrictionSpec none = RestrictionSpec::parse(f, "none");
  CHECK(none.empty());
  CHECK(none.reduced_size() == 4);
  CHECK_THROWS_AS(RestrictionSpec::parse(f, "binomial+poisson"), Error);
  CHECK_THROWS_AS(RestrictionSpec::parse(f, "full"), Error);
  CHECK_THROWS_AS(RestrictionSpec::parse(FilterFamily::beta(), "binomial"), Error);
}

TEST_CASE("restriction jacobians match finite differences") {
  const FilterFamily f = FilterFamily::inar(2);
  const RestrictionSpec g = RestrictionSpec::parse(f, "geometric+equidispersed");
  Eigen::VectorXd red(g.reduced_size());
  red << 1.2, 0.3, 0.2;
  const Eigen::MatrixXd J = g.jacobian(red);
  Eigen::VectorXd theta = g.expand(red);
  const Eigen::MatrixXd R = g.residual_jacobian(theta);
  const double h = 1e-6;
  for (int i = 0; i < red.size(); ++i) {
    Eigen::VectorXd p = red, m = red;
    p(i) += h;
    m(i) -= h;
    const Eigen::VectorXd fd = (g.expand(p) - g.expand(m)) / (2 * h);
    CHECK((J.col(i) - fd).cwiseAbs().maxCoeff() < 1e-8);
  }
  for (int i = 0; i < theta.size(); ++i) {
    Eigen::VectorXd p = theta, m = theta;
    p(i) += h;
    m(i) -= h;
    const Eigen::VectorXd fd = (g.residual(p) - g.residual(m)) / (2 * h);
    CHECK((R.col(i) - fd).cwiseAbs().maxCoeff() < 1e-8);
  }
}
