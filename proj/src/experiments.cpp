#include "pvqmle/experiments.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "pvqmle/filters.hpp"
#include "pvqmle/parallel.hpp"

#ifndef PVQMLE_VERSION
#define PVQMLE_VERSION "unknown"
#endif

namespace pvq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fixed(double x) {
  if (std::isnan(x)) return "nan";
  return fmt::format("{:.10f}", x);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out << text;
}

bool mean_only(EstimatorTag tag) { return tag != EstimatorTag::PVQMLE && tag != EstimatorTag::PVQMLE_R; }

}  // namespace

std::string EstimatorSpec::display_name() const {
  if (!label.empty()) return label;
  if (restriction.empty()) return std::string(to_string(tag));
  return fmt::format("{}[{}]", to_string(tag), restriction);
}

FilterFamily McConfig::fit_family() const {
  if (family) return *family;
  if (const auto* inar = std::get_if<InarSpec>(&dgp.model)) return FilterFamily::inar(static_cast<int>(inar->thinning.size()));
  return FilterFamily::beta();
}

DgpSpec McConfig::effective_dgp() const {
  DgpSpec out = dgp;
  if (variants.near_unit_root) {
    auto* inar = std::get_if<InarSpec>(&out.model);
    if (!inar) throw Error("near_unit_root applies to INAR designs only");
    ThinningSpec& first = inar->thinning.front();
    if (first.kind == ThinningKind::BiNB) throw Error("near_unit_root is not defined for BiNB thinning");
    first.a = 0.99;
  }
  if (variants.inject_outlier && !out.is_inar()) throw Error("inject_outlier applies to count designs only");
  return out;
}

void McConfig::validate() const {
  if (n_reps < 1) throw Error("n_reps must be >= 1");
  if (sample_sizes.empty()) throw Error("sample_sizes must not be empty");
  if (estimators.empty() && tests.empty()) throw Error("a Monte Carlo design needs estimators or tests");
  const DgpSpec effective = effective_dgp();
  effective.validate();
  const FilterFamily fam = fit_family();
  if (effective.is_inar() == (fam.kind == FamilyKind::BetaVar))
    throw Error(fmt::format("family '{}' does not match the DGP sample space", fam.name()));
  for (int T : sample_sizes)
    if (T < fam.first_usable() + 6) throw Error(fmt::format("sample size {} is too short for '{}'", T, fam.name()));
  for (const auto& e : estimators) {
    switch (e.tag) {
      case EstimatorTag::PVQMLE_R:
        if (e.restriction.empty()) throw Error("PVQMLE_R needs a restriction");
        RestrictionSpec::parse(fam, e.restriction);
        break;
      case EstimatorTag::PVQMLE:
        if (!e.restriction.empty()) throw Error("use PVQMLE_R for restricted fits");
        break;
      case EstimatorTag::CLSE:
      case EstimatorTag::WLSE:
        if (fam.kind != FamilyKind::InarLinear) throw Error(fmt::format("{} needs an INAR family", to_string(e.tag)));
        break;
      case EstimatorTag::WLSE_unfeasible:
        if (fam.kind != FamilyKind::InarLinear || !effective.is_inar())
          throw Error("WLSE_unfeasible needs an INAR family and DGP");
        if (fam.lags != static_cast<int>(std::get<InarSpec>(effective.model).thinning.size()))
          throw Error("WLSE_unfeasible needs the fitted lag order to match the DGP");
        break;
      case EstimatorTag::PoissonQMLE:
        if (fam.kind == FamilyKind::BetaVar) throw Error("PoissonQMLE needs a count family");
        break;
      case EstimatorTag::MLE_PoissonInar1:
        if (!(fam == FilterFamily::inar(1))) throw Error("MLE_PoissonInar1 needs the INAR(1) family");
        break;
    }
  }
  for (const auto& t : tests) {
    if (RestrictionSpec::parse(fam, t.restriction).empty()) throw Error("a test needs a non-empty restriction");
    if (t.levels.empty()) throw Error("a test needs at least one nominal level");
    for (double l : t.levels)
      if (!(l > 0.0 && l < 1.0)) throw Error(fmt::format("nominal level {} outside (0,1)", l));
  }
}

Eigen::VectorXd inar_true_theta(const InarSpec& spec) {
  const int p = static_cast<int>(spec.thinning.size());
  Eigen::VectorXd theta(2 * (p + 1));
  theta(0) = spec.innovation.mean();
  theta(p + 1) = spec.innovation.variance();
  for (int h = 0; h < p; ++h) {
    theta(1 + h) = spec.thinning[static_cast<std::size_t>(h)].mean_slope();
    theta(p + 2 + h) = spec.thinning[static_cast<std::size_t>(h)].variance_slope();
  }
  return theta;
}

Eigen::VectorXd true_variance_path(const InarSpec& spec, const TimeSeries& series) {
  const int p = static_cast<int>(spec.thinning.size());
  const int T = static_cast<int>(series.size());
  if (T <= p) throw Error("series shorter than the lag order");
  Eigen::VectorXd out(T);
  for (int t = p; t < T; ++t) {
    double v = spec.innovation.variance();
    for (int h = 1; h <= p; ++h)
      v += spec.thinning[static_cast<std::size_t>(h - 1)].variance_slope() * series[static_cast<std::size_t>(t - h)];
    out(t) = v;
  }
  for (int t = 0; t < p; ++t) out(t) = out(p);
  return out;
}

namespace {

struct RepOutput {
  std::vector<RepEstimate> estimates;
  std::vector<RepTest> tests;
};

FitResult run_estimator(const EstimatorSpec& e, const std::optional<RestrictionSpec>& restriction,
                        const FilterFamily& family, const TimeSeries& y, const DgpSpec& dgp,
                        const FitOptions& options) {
  switch (e.tag) {
    case EstimatorTag::PVQMLE: return fit_pvqmle(family, y, std::nullopt, std::nullopt, options);
    case EstimatorTag::PVQMLE_R: return fit_pvqmle(family, y, restriction, std::nullopt, options);
    case EstimatorTag::PoissonQMLE: return fit_poisson_qmle(family, y, options);
    case EstimatorTag::CLSE: return fit_clse(family, y);
    case EstimatorTag::WLSE: return fit_wlse(family, y, WlseWeights::estimated_binomial());
    case EstimatorTag::WLSE_unfeasible:
      return fit_wlse(family, y, WlseWeights::true_variance(true_variance_path(std::get<InarSpec>(dgp.model), y)));
    case EstimatorTag::MLE_PoissonInar1: return fit_mle_poisson_inar1(y, options);
  }
  throw Error("unknown estimator");
}

}  // namespace

McResult run_mc(const McConfig& config) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  const FilterFamily family = config.fit_family();
  const DgpSpec dgp = config.effective_dgp();

  std::vector<std::optional<RestrictionSpec>> est_restrictions;
  for (const auto& e : config.estimators)
    est_restrictions.push_back(e.tag == EstimatorTag::PVQMLE_R
                                   ? std::optional<RestrictionSpec>(RestrictionSpec::parse(family, e.restriction))
                                   : std::nullopt);
  std::vector<RestrictionSpec> test_restrictions;
  for (const auto& t : config.tests) test_restrictions.push_back(RestrictionSpec::parse(family, t.restriction));

  // Truth in full coordinates when the fitted family nests the DGP.
  std::optional<Eigen::VectorXd> truth;
  if (const auto* inar = std::get_if<InarSpec>(&dgp.model)) {
    if (family.kind == FamilyKind::InarLinear && family.lags == static_cast<int>(inar->thinning.size()))
      truth = inar_true_theta(*inar);
  } else {
    const auto& b = std::get<BetaArSpec>(dgp.model);
    Eigen::VectorXd th(7);
    th << b.omega, b.alpha, b.beta, b.omega, b.alpha, b.beta, b.phi;
    truth = th;
  }
  const auto names = family.coordinate_names();

  McResult result;
  for (int T : config.sample_sizes) {
    std::vector<RepOutput> reps(static_cast<std::size_t>(config.n_reps));
    parallel_for(config.n_reps, config.threads, [&](int i) {
      RepOutput& out = reps[static_cast<std::size_t>(i)];
      TimeSeries y = simulate(dgp, T, config.base_seed + static_cast<std::uint64_t>(i));
      if (config.variants.inject_outlier) y = inject_outlier(y);

      std::optional<FitResult> unrestricted;
      for (std::size_t k = 0; k < config.estimators.size(); ++k) {
        const auto& e = config.estimators[k];
        RepEstimate rec;
        rec.T = T;
        rec.rep = i;
        rec.estimator = e.display_name();
        try {
          FitResult fit = run_estimator(e, est_restrictions[k], family, y, dgp, config.fit_options);
          rec.converged = fit.converged;
          const Eigen::VectorXd est = mean_only(e.tag) ? fit.theta_hat.psi : fit.theta_hat.theta();
          rec.values.assign(est.data(), est.data() + est.size());
          rec.coordinates.assign(names.begin(), names.begin() + est.size());
          if (e.tag == EstimatorTag::PVQMLE) unrestricted = std::move(fit);
        } catch (const Error&) {
          rec.converged = false;
        }
        out.estimates.push_back(std::move(rec));
      }

      if (config.tests.empty()) return;
      if (!unrestricted) {
        try {
          unrestricted = fit_pvqmle(family, y, std::nullopt, std::nullopt, config.fit_options);
        } catch (const Error&) {
        }
      }
      std::optional<CovarianceResult> cov;
      int n_terms = 0;
      if (unrestricted && unrestricted->converged) {
        try {
          const ObjectiveEval ev = evaluate(family, unrestricted->theta_hat.theta(), y, EvalLevel::Full);
          cov = sandwich(ev);
          n_terms = ev.n_terms;
        } catch (const Error&) {
        }
      }
      for (std::size_t k = 0; k < config.tests.size(); ++k) {
        RepTest rec;
        rec.T = T;
        rec.rep = i;
        rec.restriction = config.tests[k].restriction;
        if (cov) {
          try {
            const WaldResult w = wald_statistic(test_restrictions[k], unrestricted->theta_hat.theta(), cov->sigma, n_terms);
            rec.valid = std::isfinite(w.statistic);
            rec.statistic = w.statistic;
            rec.p_value = w.p_value;
          } catch (const Error&) {
          }
        }
        out.tests.push_back(std::move(rec));
      }
    });

    // Aggregation in replication order.
    for (std::size_t k = 0; k < config.estimators.size(); ++k) {
      const auto& e = config.estimators[k];
      const int width = mean_only(e.tag) ? family.psi_size() : family.size();
      for (int c = 0; c < width; ++c) {
        EstimateCell cell;
        cell.T = T;
        cell.estimator = e.display_name();
        cell.coordinate = names[static_cast<std::size_t>(c)];
        cell.n_reps = config.n_reps;
        cell.truth = truth ? (*truth)(c) : kNaN;
        double sum = 0.0, sum_sq = 0.0, sum_est = 0.0, sum_est_sq = 0.0;
        for (const auto& rep : reps) {
          const RepEstimate& rec = rep.estimates[k];
          if (!rec.converged) continue;
          const double x = rec.values[static_cast<std::size_t>(c)];
          const double err = x - cell.truth;
          ++cell.n_converged;
          sum += err;
          sum_sq += err * err;
          sum_est += x;
          sum_est_sq += x * x;
        }
        const double n = cell.n_converged;
        if (n > 0 && truth) {
          cell.bias = sum / n;
          cell.rmse = std::sqrt(sum_sq / n);
        } else {
          cell.bias = cell.rmse = kNaN;
        }
        if (n > 1) {
          const double var = std::max(0.0, (sum_est_sq - sum_est * sum_est / n) / (n - 1.0));
          cell.mc_se = std::sqrt(var / n);
        } else {
          cell.mc_se = kNaN;
        }
        result.estimates.push_back(cell);
      }
    }
    for (std::size_t k = 0; k < config.tests.size(); ++k) {
      for (double level : config.tests[k].levels) {
        TestCell cell;
        cell.T = T;
        cell.restriction = config.tests[k].restriction;
        cell.level = level;
        cell.n_reps = config.n_reps;
        int rejected = 0;
        for (const auto& rep : reps) {
          const RepTest& rec = rep.tests[k];
          if (!rec.valid) continue;
          ++cell.n_valid;
          if (rec.p_value < level) ++rejected;
        }
        cell.rejection_rate = cell.n_valid ? static_cast<double>(rejected) / cell.n_valid : kNaN;
        result.tests.push_back(cell);
      }
    }
    for (auto& rep : reps) {
      for (auto& r : rep.estimates) result.rep_estimates.push_back(std::move(r));
      for (auto& r : rep.tests) result.rep_tests.push_back(std::move(r));
    }
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

std::string estimates_csv(const McResult& result) {
  std::string out = "T,estimator,coordinate,truth,bias,rmse,mc_se,n_converged,n_reps\n";
  for (const auto& c : result.estimates)
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", c.T, c.estimator, c.coordinate, fixed(c.truth), fixed(c.bias),
                       fixed(c.rmse), fixed(c.mc_se), c.n_converged, c.n_reps);
  return out;
}

std::string tests_csv(const McResult& result) {
  std::string out = "T,restriction,level,rejection_rate,n_valid,n_reps\n";
  for (const auto& c : result.tests)
    out += fmt::format("{},{},{},{},{},{}\n", c.T, c.restriction, fixed(c.level), fixed(c.rejection_rate), c.n_valid,
                       c.n_reps);
  return out;
}

std::string rep_estimates_csv(const McResult& result) {
  std::string out = "T,rep,estimator,converged,coordinate,estimate\n";
  for (const auto& r : result.rep_estimates)
    for (std::size_t c = 0; c < r.values.size(); ++c)
      out += fmt::format("{},{},{},{},{},{}\n", r.T, r.rep, r.estimator, r.converged ? 1 : 0, r.coordinates[c],
                         fixed(r.values[c]));
  return out;
}

std::string rep_tests_csv(const McResult& result) {
  std::string out = "T,rep,restriction,valid,statistic,p_value\n";
  for (const auto& r : result.rep_tests)
    out += fmt::format("{},{},{},{},{},{}\n", r.T, r.rep, r.restriction, r.valid ? 1 : 0,
                       r.valid ? fixed(r.statistic) : "nan", r.valid ? fixed(r.p_value) : "nan");
  return out;
}

void write_mc_outputs(const McConfig& config, const McResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "estimates.csv", estimates_csv(result));
  write_text(dir / "tests.csv", tests_csv(result));
  if (config.persist_reps) {
    write_text(dir / "rep_estimates.csv", rep_estimates_csv(result));
    write_text(dir / "rep_tests.csv", rep_tests_csv(result));
  }
  std::map<std::string, int> dropped;
  for (const auto& r : result.rep_estimates)
    if (!r.converged) ++dropped[fmt::format("T={} {}", r.T, r.estimator)];
  nlohmann::ordered_json summary;
  summary["name"] = config.name;
  summary["base_seed"] = config.base_seed;
  summary["n_reps"] = config.n_reps;
  summary["sample_sizes"] = config.sample_sizes;
  summary["family"] = config.fit_family().name();
  summary["rng"] = "mt19937_64 + Boost.Random distributions";
  summary["versions"] = {{"pvqmle", PVQMLE_VERSION},
                         {"compiler", __VERSION__},
                         {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
                         {"boost", BOOST_LIB_VERSION}};
  summary["dropped_replications"] = dropped;
  summary["wall_time_seconds"] = result.wall_seconds;
  write_text(dir / "summary.json", summary.dump(2) + "\n");
}

std::vector<PowerRow> run_power_curve(const PowerConfig& config) {
  std::vector<PowerRow> rows;
  for (double pct : config.overdispersion) {
    if (!(pct >= 0.0 && pct < 1.0)) throw Error(fmt::format("overdispersion share {} outside [0,1)", pct));
    McConfig mc;
    mc.name = "power";
    const double v = pct > 0.0 ? negbin_v_for_overdispersion(config.a, pct) : 0.0;
    const ThinningSpec thinning = pct > 0.0 ? ThinningSpec::negbin(config.a, v) : ThinningSpec::poisson(config.a);
    mc.dgp.model = InarSpec{{thinning}, Innovation{InnovationKind::Poisson, config.omega, 0.0}};
    mc.dgp.burn_in = config.burn_in;
    mc.sample_sizes = config.sample_sizes;
    mc.n_reps = config.n_reps;
    mc.tests = {TestSpec{config.restriction, {config.level}}};
    mc.base_seed = config.base_seed;
    mc.variants = config.variants;
    mc.threads = config.threads;
    const McResult res = run_mc(mc);
    for (const auto& cell : res.tests)
      rows.push_back({cell.T, pct, config.a / (1.0 - pct), v, cell.rejection_rate, cell.n_valid});
  }
  return rows;
}

std::string power_csv(const std::vector<PowerRow>& rows) {
  std::string out = "T,overdispersion,b,v,rejection_rate,n_valid\n";
  for (const auto& r : rows)
    out += fmt::format("{},{},{},{},{},{}\n", r.T, fixed(r.overdispersion), fixed(r.b), fixed(r.v),
                       fixed(r.rejection_rate), r.n_valid);
  return out;
}

std::vector<double> autocorrelation(const Eigen::VectorXd& x, int max_lag) {
  const Eigen::Index n = x.size();
  if (n < 2) throw Error("autocorrelation needs at least two values");
  const Eigen::VectorXd c = x.array() - x.mean();
  const double denom = c.squaredNorm();
  std::vector<double> out;
  for (int k = 1; k <= max_lag && k < n; ++k)
    out.push_back(denom > 0.0 ? c.head(n - k).dot(c.tail(n - k)) / denom : 0.0);
  return out;
}

std::string acf_csv(const std::vector<double>& acf, int n) {
  const double band = 1.96 / std::sqrt(static_cast<double>(n));
  std::string out = "lag,acf,lower,upper\n";
  for (std::size_t k = 0; k < acf.size(); ++k)
    out += fmt::format("{},{},{},{}\n", k + 1, fixed(acf[k]), fixed(-band), fixed(band));
  return out;
}

ApplicationReport run_application(const TimeSeries& series, const FilterFamily& family,
                                  const std::vector<std::string>& restrictions, double level, int max_lag,
                                  const FitOptions& options) {
  ApplicationReport report;
  report.unrestricted = fit_pvqmle(family, series, std::nullopt, std::nullopt, options);
  const Eigen::VectorXd theta = report.unrestricted.theta_hat.theta();
  const ObjectiveEval ev = evaluate(family, theta, series, EvalLevel::Full);
  report.covariance = sandwich(ev);

  for (const auto& text : restrictions) {
    const RestrictionSpec spec = RestrictionSpec::parse(family, text);
    WaldResult w = wald_statistic(spec, theta, report.covariance.sigma, ev.n_terms);
    w.restriction_name = text;
    if (w.p_value >= level) {
      FitResult fit = fit_pvqmle(family, series, spec, std::nullopt, options);
      CovarianceResult cov = fit_covariance(fit, series);
      report.restricted.push_back({std::move(fit), std::move(cov)});
    }
    report.tests.push_back(std::move(w));
  }

  const FilteredPaths paths = run_filter(family, theta, series, DerivLevel::None);
  const int n = paths.size() - paths.valid_from;
  report.pearson_residuals.resize(n);
  for (int t = paths.valid_from; t < paths.size(); ++t)
    report.pearson_residuals(t - paths.valid_from) =
        (series[static_cast<std::size_t>(t)] - paths.lambda(t)) / std::sqrt(paths.nu_star(t));
  report.residual_acf = autocorrelation(report.pearson_residuals, max_lag);
  return report;
}

}  // namespace pvq
