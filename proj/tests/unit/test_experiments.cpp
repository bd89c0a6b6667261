#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pvqmle/experiments.hpp"
#include "pvqmle/json_io.hpp"

using namespace pvq;

namespace {

DgpSpec inar1(ThinningSpec t, double omega) {
  DgpSpec d;
  d.model = InarSpec{{t}, Innovation{InnovationKind::Poisson, omega, 0.0}};
  return d;
}

McConfig ladder_like(std::uint64_t seed, int reps) {
  McConfig c;
  c.dgp = inar1(ThinningSpec::binomial(0.85), 3.0);
  c.sample_sizes = {500};
  c.n_reps = reps;
  c.base_seed = seed;
  c.estimators = {{EstimatorTag::PVQMLE, "", ""}, {EstimatorTag::PVQMLE_R, "binomial+equidispersed", "R3"}};
  return c;
}

const EstimateCell& find(const McResult& r, const std::string& est, const std::string& coord) {
  for (const auto& c : r.estimates)
    if (c.estimator == est && c.coordinate == coord) return c;
  throw Error("missing cell");
}

}  // namespace

TEST_CASE("single replication: bias is the error and RMSE its magnitude") {
  McConfig c = ladder_like(77, 1);
  c.estimators = {{EstimatorTag::CLSE, "", ""}};
  const McResult r = run_mc(c);
  TimeSeries y = simulate(c.dgp, 500, 77);
  const FitResult fit = fit_clse(FilterFamily::inar(1), y);
  const EstimateCell& a = find(r, "CLSE", "a");
  CHECK(a.bias == doctest::Approx(fit.theta_hat.psi(1) - 0.85).epsilon(1e-12));
  CHECK(a.rmse == doctest::Approx(std::abs(a.bias)).epsilon(1e-12));
  CHECK(a.n_converged == 1);
}

TEST_CASE("aggregates satisfy RMSE >= |bias| and are seed-range stable") {
  const McResult a = run_mc(ladder_like(1, 200));
  const McResult b = run_mc(ladder_like(100001, 200));
  for (const auto& cell : a.estimates) {
    CHECK(cell.rmse >= std::abs(cell.bias));
    CHECK(cell.n_converged <= cell.n_reps);
  }
  for (const char* est : {"PVQMLE", "R3"}) {
    for (const char* coord : {"omega1", "a"}) {
      const EstimateCell& x = find(a, est, coord);
      const EstimateCell& y = find(b, est, coord);
      CHECK(std::abs(x.bias - y.bias) < 4.0 * std::hypot(x.mc_se, y.mc_se));
    }
  }
}

TEST_CASE("results do not depend on the worker count") {
  McConfig c = ladder_like(5, 16);
  c.tests = {TestSpec{"binomial", {0.05}}};
  c.threads = 1;
  const McResult a = run_mc(c);
  c.threads = 3;
  const McResult b = run_mc(c);
  CHECK(estimates_csv(a) == estimates_csv(b));
  CHECK(tests_csv(a) == tests_csv(b));
  CHECK(rep_tests_csv(a) == rep_tests_csv(b));
}

TEST_CASE("config validation") {
  McConfig c = ladder_like(1, 0);
  CHECK_THROWS_AS(c.validate(), Error);
  c = ladder_like(1, 2);
  c.sample_sizes.clear();
  CHECK_THROWS_AS(c.validate(), Error);
  c = ladder_like(1, 2);
  c.estimators.push_back({EstimatorTag::PVQMLE_R, "full", ""});
  CHECK_THROWS_AS(c.validate(), Error);
  c = ladder_like(1, 2);
  c.family = FilterFamily::beta();
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("config JSON round trip") {
  McConfig c = ladder_like(9, 3);
  c.tests = {TestSpec{"poisson", {0.01, 0.05}}};
  c.variants.inject_outlier = true;
  const Json j = mc_config_to_json(c);
  const McConfig back = mc_config_from_json(j);
  CHECK(mc_config_to_json(back).dump() == j.dump());
  CHECK_THROWS_AS(mc_config_from_json(Json::parse(R"({"dgp": {"type": "inar"}})")), Error);
}

TEST_CASE("variants modify the design") {
  McConfig c = ladder_like(1, 2);
  c.variants.near_unit_root = true;
  CHECK(std::get<InarSpec>(c.effective_dgp().model).thinning[0].a == 0.99);
}

TEST_CASE("power curve: zero overdispersion is the null design") {
  PowerConfig p;
  p.overdispersion = {0.0, 0.2};
  p.sample_sizes = {300};
  p.n_reps = 50;
  const auto rows = run_power_curve(p);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].b == doctest::Approx(0.75));
  CHECK(rows[0].v == 0.0);
  CHECK(rows[1].v == doctest::Approx(3.0));
  CHECK(rows[1].b == doctest::Approx(0.9375));
  CHECK(1.0 - 0.75 / rows[1].b == doctest::Approx(0.2));
}

TEST_CASE("autocorrelation of a known sequence") {
  Eigen::VectorXd x(4);
  x << 1, -1, 1, -1;
  const auto acf = autocorrelation(x, 2);
  CHECK(acf[0] == doctest::Approx(-0.75));
  CHECK(acf[1] == doctest::Approx(0.5));
}

TEST_CASE("application pipeline round trip on geometric-thinning data") {
  // Fitted-model style DGP: geometric thinning, overdispersed innovations.
  DgpSpec d;
  d.model = InarSpec{{ThinningSpec::geometric(0.5)}, Innovation{InnovationKind::NegBin, 4.5, 10.0}};
  const TimeSeries y = simulate(d, 3000, 31);
  const ApplicationReport rep =
      run_application(y, FilterFamily::inar(1), {"equidispersed", "binomial", "poisson", "geometric"});
  REQUIRE(rep.unrestricted.converged);
  REQUIRE(rep.tests.size() == 4);
  CHECK(rep.tests[1].p_value < 0.05);  // binomial thinning is wrong here
  const RestrictedReport* geo = nullptr;
  for (const auto& r : rep.restricted)
    if (r.fit.restriction->name() == "geometric") geo = &r;
  REQUIRE(geo != nullptr);
  CHECK(std::abs(geo->fit.theta_hat["a"] - 0.5) <= 2.0 * geo->covariance.se(1));
  CHECK(std::abs(geo->fit.theta_hat["omega1"] - 4.5) <= 2.0 * geo->covariance.se(0));
  CHECK(rep.residual_acf.size() == 20);
  CHECK(std::abs(rep.residual_acf[0]) < 0.1);
}

TEST_CASE("outputs are written") {
  McConfig c = ladder_like(3, 4);
  c.persist_reps = true;
  const McResult r = run_mc(c);
  const auto dir = std::filesystem::temp_directory_path() / "pvqmle_mc_test";
  write_mc_outputs(c, r, dir);
  for (const char* f : {"estimates.csv", "tests.csv", "summary.json", "rep_estimates.csv"})
    CHECK(std::filesystem::exists(dir / f));
  const Json s = read_json_file(dir / "summary.json");
  CHECK(s.at("base_seed").get<int>() == 3);
  CHECK(s.contains("wall_time_seconds"));
}
