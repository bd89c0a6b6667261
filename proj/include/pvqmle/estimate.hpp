#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include <Eigen/Core>

#include "pvqmle/family.hpp"
#include "pvqmle/restriction.hpp"
#include "pvqmle/series.hpp"

namespace pvq {

enum class EstimatorTag { PVQMLE, PVQMLE_R, PoissonQMLE, CLSE, WLSE, WLSE_unfeasible, MLE_PoissonInar1 };

std::string_view to_string(EstimatorTag tag);
EstimatorTag parse_estimator_tag(std::string_view name);

/// Outcome of one estimation. theta_hat is always in full coordinates; for
/// estimators of the mean only (CLSE, WLSE, QMLE, MLE) its gamma part is empty.
struct FitResult {
  EstimatorTag tag = EstimatorTag::PVQMLE;
  FilterFamily family{};
  std::optional<RestrictionSpec> restriction;
  ParamVector theta_hat;
  Eigen::VectorXd reduced_hat;  // (psi, gamma_2) for restricted fits, else theta
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
  int restarts = 0;
  double grad_norm = 0.0;
  bool clamp_flag = false;
  int n_terms = 0;

  bool restricted() const { return restriction && !restriction->empty(); }
};

struct FitOptions {
  double tol_g = 1e-6;
  int max_iter = 500;
  int max_restarts = 5;
  double jitter = 0.1;              // multiplicative noise on restart values
  std::uint64_t jitter_seed = 7919;
};

/// Starting values for the unrestricted family parameters (CLSE means and a
/// moment regression of squared residuals for INAR; fixed persistence for the
/// recursive families).
Eigen::VectorXd default_start(const FilterFamily& family, const TimeSeries& series);

/// Unrestricted (restriction empty or absent) or restricted PVQMLE by BFGS
/// over transformed coordinates. Non-convergence is reported, never thrown.
FitResult fit_pvqmle(const FilterFamily& family, const TimeSeries& series,
                     const std::optional<RestrictionSpec>& restriction = std::nullopt,
                     const std::optional<Eigen::VectorXd>& start = std::nullopt, const FitOptions& options = {});

/// Ordinary least squares of Y_t on (1, Y_{t-1}, ..., Y_{t-p}).
FitResult fit_clse(const FilterFamily& family, const TimeSeries& series);

/// Poisson quasi-likelihood: maximizes sum (Y_t log lambda_t - lambda_t).
FitResult fit_poisson_qmle(const FilterFamily& family, const TimeSeries& series, const FitOptions& options = {});

/// Weights for the two-stage weighted least squares estimator.
struct WlseWeights {
  enum class Kind { EstimatedBinomial, TrueVariance } kind = Kind::EstimatedBinomial;
  Eigen::VectorXd variance_path;  // length T, used by TrueVariance

  static WlseWeights estimated_binomial() { return {}; }
  static WlseWeights true_variance(Eigen::VectorXd path) { return {Kind::TrueVariance, std::move(path)}; }
};

/// Weighted least squares sum (Y_t - lambda_t)^2 / w_t with weights floored at
/// the pseudo-variance floor. EstimatedBinomial uses CLSE first-stage weights
/// sum_h a_h(1-a_h) Y_{t-h} + omega.
FitResult fit_wlse(const FilterFamily& family, const TimeSeries& series, const WlseWeights& weights);

/// log P(Y_t = y | Y_{t-1} = x) for binomial thinning with Poisson(omega)
/// innovations, plus its gradient in (omega, a) when requested.
double inar1_log_transition(long y, long x, double a, double omega, double* d_omega = nullptr,
                            double* d_a = nullptr);

/// Exact conditional MLE of the Poisson INAR(1) model; psi = (omega, a).
FitResult fit_mle_poisson_inar1(const TimeSeries& series, const FitOptions& options = {});

}  // namespace pvq
