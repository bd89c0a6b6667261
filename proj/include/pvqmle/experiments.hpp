#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pvqmle/dgp.hpp"
#include "pvqmle/estimate.hpp"
#include "pvqmle/inference.hpp"

namespace pvq {

struct EstimatorSpec {
  EstimatorTag tag = EstimatorTag::PVQMLE;
  std::string restriction;  // PVQMLE_R only
  std::string label;        // defaults to tag or tag[restriction]

  std::string display_name() const;
};

struct TestSpec {
  std::string restriction;
  std::vector<double> levels{0.01, 0.05, 0.10};
};

struct McVariants {
  bool inject_outlier = false;
  bool near_unit_root = false;  // first-lag mean slope set to 0.99
};

/// Declarative Monte Carlo design. Replication i simulates with seed
/// base_seed + i at every sample size.
struct McConfig {
  std::string name = "mc";
  DgpSpec dgp;
  std::optional<FilterFamily> family;  // defaults from the DGP
  std::vector<int> sample_sizes;
  int n_reps = 500;
  std::vector<EstimatorSpec> estimators;
  std::vector<TestSpec> tests;
  std::uint64_t base_seed = 1;
  McVariants variants;
  int threads = 0;
  bool persist_reps = false;
  FitOptions fit_options;

  FilterFamily fit_family() const;
  /// DGP with variants applied.
  DgpSpec effective_dgp() const;
  void validate() const;
};

struct EstimateCell {
  int T = 0;
  std::string estimator;
  std::string coordinate;
  double truth = 0.0;
  double bias = 0.0;
  double rmse = 0.0;
  double mc_se = 0.0;  // standard error of the bias
  int n_converged = 0;
  int n_reps = 0;
};

struct TestCell {
  int T = 0;
  std::string restriction;
  double level = 0.0;
  double rejection_rate = 0.0;
  int n_valid = 0;
  int n_reps = 0;
};

struct RepEstimate {
  int T = 0;
  int rep = 0;
  std::string estimator;
  bool converged = false;
  std::vector<std::string> coordinates;
  std::vector<double> values;
};

struct RepTest {
  int T = 0;
  int rep = 0;
  std::string restriction;
  bool valid = false;
  double statistic = 0.0;
  double p_value = 1.0;
};

struct McResult {
  std::vector<EstimateCell> estimates;
  std::vector<TestCell> tests;
  std::vector<RepEstimate> rep_estimates;  // always kept in memory
  std::vector<RepTest> rep_tests;
  double wall_seconds = 0.0;
};

/// True (psi, gamma) of a linear INAR DGP: (omega, a_h) and (Var eps, b_h).
Eigen::VectorXd inar_true_theta(const InarSpec& spec);

/// Conditional variance sum_h b_h Y_{t-h} + Var(eps) of an INAR DGP
/// along a path (entries before the first usable index repeat it).
Eigen::VectorXd true_variance_path(const InarSpec& spec, const TimeSeries& series);

McResult run_mc(const McConfig& config);

std::string estimates_csv(const McResult& result);
std::string tests_csv(const McResult& result);
std::string rep_estimates_csv(const McResult& result);
std::string rep_tests_csv(const McResult& result);

/// Writes estimates.csv, tests.csv, summary.json and, when requested, the
/// per-replication CSVs into `dir`.
void write_mc_outputs(const McConfig& config, const McResult& result, const std::filesystem::path& dir);

/// Overdispersion sweep for the b = a test under NegBin thinning.
struct PowerConfig {
  double a = 0.75;
  double omega = 1.0;
  std::vector<double> overdispersion{0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
  std::vector<int> sample_sizes{2000};
  int n_reps = 2000;
  std::string restriction = "poisson";
  double level = 0.05;
  std::uint64_t base_seed = 1;
  int burn_in = 500;
  McVariants variants;
  int threads = 0;
};

struct PowerRow {
  int T = 0;
  double overdispersion = 0.0;
  double b = 0.0;
  double v = 0.0;  // 0 when the thinning is Poisson (pct = 0)
  double rejection_rate = 0.0;
  int n_valid = 0;
};

/// b = a / (1 - pct), v = a^2 / (b - a); pct = 0 uses Poisson thinning.
std::vector<PowerRow> run_power_curve(const PowerConfig& config);
std::string power_csv(const std::vector<PowerRow>& rows);

struct RestrictedReport {
  FitResult fit;
  CovarianceResult covariance;
};

struct ApplicationReport {
  FitResult unrestricted;
  CovarianceResult covariance;
  std::vector<WaldResult> tests;
  std::vector<RestrictedReport> restricted;  // restrictions not rejected at `level`
  Eigen::VectorXd pearson_residuals;
  std::vector<double> residual_acf;  // lags 1..max_lag
};

/// Unrestricted fit with SEs, Wald test of each restriction (compound
/// restrictions such as "equidispersed+poisson" are stacked joint tests),
/// restricted fits for those not rejected, and the residual ACF.
ApplicationReport run_application(const TimeSeries& series, const FilterFamily& family,
                                  const std::vector<std::string>& restrictions, double level = 0.05,
                                  int max_lag = 20, const FitOptions& options = {});

/// Sample autocorrelations at lags 1..max_lag.
std::vector<double> autocorrelation(const Eigen::VectorXd& x, int max_lag);

/// lag,acf,lower,upper with +-1.96/sqrt(n) bands.
std::string acf_csv(const std::vector<double>& acf, int n);

}  // namespace pvq
