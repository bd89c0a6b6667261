#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pvqmle/dgp.hpp"
#include "pvqmle/estimate.hpp"
#include "pvqmle/inference.hpp"
#include "pvqmle/json_io.hpp"
#include "pvqmle/objective.hpp"
#include "pvqmle/special.hpp"

namespace py = pybind11;
using namespace pvq;

namespace {

TimeSeries make_series(const std::vector<double>& y, const FilterFamily& family) {
  return TimeSeries(y, family.kind == FamilyKind::BetaVar ? SampleSpace::UnitInterval : SampleSpace::Counts);
}

py::dict fit_dict(const FitResult& r, const std::optional<CovarianceResult>& cov) {
  py::dict d;
  d["estimator"] = std::string(to_string(r.tag));
  d["family"] = r.family.name();
  d["restriction"] = r.restricted() ? r.restriction->name() : std::string("none");
  d["names"] = r.theta_hat.names;
  d["theta"] = Eigen::VectorXd(r.theta_hat.theta());
  d["reduced"] = r.reduced_hat;
  d["loglik"] = r.loglik;
  d["converged"] = r.converged;
  d["iterations"] = r.iterations;
  d["grad_norm"] = r.grad_norm;
  d["n_terms"] = r.n_terms;
  if (cov) {
    d["se"] = cov->se;
    d["sigma"] = cov->sigma;
    d["psd_flag"] = cov->psd_flag;
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_pvqmle, m) {
  m.doc() = "Pseudo-variance quasi-maximum likelihood estimation";
  py::register_exception<Error>(m, "PvqmleError", PyExc_ValueError);

  m.def(
      "simulate",
      [](const std::string& dgp_json, int length, std::uint64_t seed, bool outlier) {
        TimeSeries y = simulate(dgp_from_json(Json::parse(dgp_json)), length, seed);
        if (outlier) y = inject_outlier(y);
        return std::vector<double>(y.values().begin(), y.values().end());
      },
      py::arg("dgp_json"), py::arg("length"), py::arg("seed"), py::arg("outlier") = false,
      "Simulate a series from a JSON DGP description.");

  m.def(
      "fit",
      [](const std::vector<double>& y, const std::string& family_name, const std::string& restriction) {
        const FilterFamily family = FilterFamily::parse(family_name);
        const TimeSeries s = make_series(y, family);
        const RestrictionSpec spec = RestrictionSpec::parse(family, restriction);
        const FitResult r = fit_pvqmle(family, s, spec.empty() ? std::nullopt : std::optional(spec));
        return fit_dict(r, fit_covariance(r, s));
      },
      py::arg("y"), py::arg("family") = "inar", py::arg("restriction") = "none",
      "Unrestricted or restricted PVQMLE with sandwich standard errors.");

  m.def(
      "fit_clse",
      [](const std::vector<double>& y, const std::string& family_name) {
        const FilterFamily family = FilterFamily::parse(family_name);
        return fit_dict(fit_clse(family, make_series(y, family)), std::nullopt);
      },
      py::arg("y"), py::arg("family") = "inar");

  m.def(
      "fit_mle_inar1",
      [](const std::vector<double>& y) {
        return fit_dict(fit_mle_poisson_inar1(TimeSeries(y, SampleSpace::Counts)), std::nullopt);
      },
      py::arg("y"));

  m.def(
      "wald_test",
      [](const std::vector<double>& y, const std::string& family_name, const std::string& restriction) {
        const FilterFamily family = FilterFamily::parse(family_name);
        const TimeSeries s = make_series(y, family);
        const FitResult r = fit_pvqmle(family, s);
        const ObjectiveEval ev = evaluate(family, r.theta_hat.theta(), s, EvalLevel::Full);
        const WaldResult w = wald_test(r, ev, RestrictionSpec::parse(family, restriction));
        py::dict d;
        d["restriction"] = w.restriction_name;
        d["statistic"] = w.statistic;
        d["dof"] = w.dof;
        d["p_value"] = w.p_value;
        return d;
      },
      py::arg("y"), py::arg("family"), py::arg("restriction"));

  m.def(
      "evaluate",
      [](const std::vector<double>& y, const std::string& family_name, const Eigen::VectorXd& theta) {
        const FilterFamily family = FilterFamily::parse(family_name);
        const ObjectiveEval ev = evaluate(family, theta, make_series(y, family), EvalLevel::Full);
        py::dict d;
        d["loglik"] = ev.loglik;
        d["score"] = ev.score;
        d["hessian"] = ev.hessian;
        d["opg"] = ev.opg;
        d["n_terms"] = ev.n_terms;
        return d;
      },
      py::arg("y"), py::arg("family"), py::arg("theta"),
      "Average quasi-log-likelihood, score, negative Hessian and OPG at theta.");

  m.def(
      "variance_ratio_grid",
      [](const std::vector<std::pair<double, double>>& grid, int t_long, std::uint64_t seed) {
        std::vector<std::tuple<double, double, double, double>> out;
        for (const auto& r : variance_ratio_grid(grid, t_long, seed, 1))
          out.emplace_back(r.a, r.omega, r.log10_ratio_a, r.log10_ratio_omega);
        return out;
      },
      py::arg("grid"), py::arg("t_long") = 10000, py::arg("seed") = 1);

  m.def("chi2_sf", &chi2_sf, py::arg("x"), py::arg("dof"), "Upper tail of the chi-square distribution.");
}
