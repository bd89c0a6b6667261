#include <doctest.h>

#include <cmath>

#include "pvqmle/dgp.hpp"

using namespace pvq;

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

template <class Draw>
Moments sample_moments(int n, Draw draw) {
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(draw());
    s += x;
    s2 += x * x;
  }
  Moments m;
  m.mean = s / n;
  m.var = s2 / n - m.mean * m.mean;
  return m;
}

DgpSpec inar1(ThinningSpec t, double omega) {
  DgpSpec d;
  d.model = InarSpec{{t}, Innovation{InnovationKind::Poisson, omega, 0.0}};
  return d;
}

}  // namespace

TEST_CASE("thinning draws have mean a n and variance b n") {
  const long n = 20;
  const int draws = 200000;
  for (const ThinningSpec& spec : {ThinningSpec::binomial(0.6), ThinningSpec::poisson(0.6), ThinningSpec::geometric(0.6),
                                   ThinningSpec::negbin(0.6, 2.0), ThinningSpec::binb(0.5, 0.2)}) {
    Rng rng(17);
    const Moments m = sample_moments(draws, [&] { return thin(spec, n, rng); });
    const double mean = spec.mean_slope() * n, var = spec.variance_slope() * n;
    // Five standard errors of the sample mean / variance.
    CHECK(std::abs(m.mean - mean) < 5.0 * std::sqrt(var / draws));
    CHECK(std::abs(m.var - var) / var < 0.03);
  }
}

TEST_CASE("variance slopes of the thinning operators") {
  CHECK(ThinningSpec::binomial(0.6).variance_slope() == doctest::Approx(0.24));
  CHECK(ThinningSpec::poisson(0.6).variance_slope() == doctest::Approx(0.6));
  CHECK(ThinningSpec::geometric(0.6).variance_slope() == doctest::Approx(0.96));
  CHECK(ThinningSpec::negbin(0.6, 2.0).variance_slope() == doctest::Approx(0.6 + 0.36 / 2.0));
  const ThinningSpec b = ThinningSpec::binb(0.5, 0.2);
  CHECK(b.mean_slope() == doctest::Approx(0.7));
  CHECK(b.variance_slope() / b.mean_slope() == doctest::Approx(1.0 + 0.5 - 0.2));
}

TEST_CASE("overdispersion to NegBin dispersion mapping") {
  const double v = negbin_v_for_overdispersion(0.75, 0.2);
  CHECK(v == doctest::Approx(3.0));
  CHECK(ThinningSpec::negbin(0.75, v).variance_slope() == doctest::Approx(0.9375));
  CHECK(ThinningSpec::negbin(0.75, v).overdispersion() == doctest::Approx(0.2));
  CHECK_THROWS_AS(negbin_v_for_overdispersion(0.75, 0.0), Error);
}

TEST_CASE("innovation moments") {
  Rng rng(5);
  const Innovation nb{InnovationKind::NegBin, 2.0, 4.0};
  const Moments m = sample_moments(200000, [&] { return draw_innovation(nb, rng); });
  CHECK(m.mean == doctest::Approx(2.0).epsilon(0.01));
  CHECK(m.var == doctest::Approx(nb.variance()).epsilon(0.03));
  CHECK(nb.variance() == doctest::Approx(3.0));
}

TEST_CASE("simulation is reproducible and stationary") {
  const DgpSpec d = inar1(ThinningSpec::binomial(0.85), 3.0);
  const TimeSeries a = simulate(d, 500, 42), b = simulate(d, 500, 42), c = simulate(d, 500, 43);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  const TimeSeries long_path = simulate(d, 200000, 1);
  CHECK(long_path.mean() == doctest::Approx(3.0 / 0.15).epsilon(0.02));
  // Poisson INAR(1) with binomial thinning has Poisson marginals.
  CHECK(long_path.stddev() * long_path.stddev() == doctest::Approx(20.0).epsilon(0.05));
}

TEST_CASE("beta autoregression stays in the unit interval") {
  DgpSpec d;
  d.model = BetaArSpec{0.05, 0.25, 0.65, 30.0};
  const TimeSeries y = simulate(d, 20000, 3);
  CHECK(y.space() == SampleSpace::UnitInterval);
  CHECK(y.mean() == doctest::Approx(0.05 / 0.1).epsilon(0.03));
}

TEST_CASE("non-stationary specifications are rejected") {
  CHECK_THROWS_AS(simulate(inar1(ThinningSpec::poisson(1.0), 1.0), 100, 1), Error);
  DgpSpec two;
  two.model = InarSpec{{ThinningSpec::poisson(0.6), ThinningSpec::poisson(0.5)}, Innovation{}};
  CHECK_THROWS_AS(two.validate(), Error);
  DgpSpec beta;
  beta.model = BetaArSpec{0.2, 0.4, 0.5, 10.0};
  CHECK_THROWS_AS(beta.validate(), Error);
}

TEST_CASE("outlier injection replaces the middle value") {
  const TimeSeries y({1, 2, 3, 4, 5}, SampleSpace::Counts);
  const TimeSeries z = inject_outlier(y);
  CHECK(z[2] == std::round(3.0 + 3.0 * y.stddev()));
  CHECK(z[0] == 1.0);
  CHECK(z[4] == 5.0);
}
