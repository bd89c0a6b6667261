#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pvqmle/estimate.hpp"
#include "pvqmle/objective.hpp"
#include "pvqmle/restriction.hpp"
#include "pvqmle/series.hpp"

namespace pvq {

/// Sample sandwich H^-1 I H^-1 and the standard errors it implies.
struct CovarianceResult {
  Eigen::MatrixXd sigma;
  Eigen::VectorXd se;              // sqrt(diag(sigma) / n_terms)
  double condition_number = 0.0;   // |lambda|_max / |lambda|_min of H
  bool psd_flag = false;           // raised when H had to be pseudo-inverted or was indefinite
  bool indefinite = false;         // H has a clearly negative eigenvalue
  int n_terms = 0;
};

/// Relative eigenvalue cutoff below which H is treated as singular.
inline constexpr double kPseudoInverseCutoff = 1e-10;

CovarianceResult sandwich(const Eigen::MatrixXd& hessian, const Eigen::MatrixXd& opg, int n_terms);
CovarianceResult sandwich(const ObjectiveEval& eval);

/// Symmetric (pseudo-)inverse through an eigendecomposition. The flags report
/// what happened, as in CovarianceResult.
Eigen::MatrixXd symmetric_inverse(const Eigen::MatrixXd& a, bool* pseudo = nullptr, bool* indefinite = nullptr,
                                  double* condition = nullptr);

/// psi-block of the restricted covariance assembled from the (psi, gamma_2)
/// partitions of D = H^-1 and I:
///   D_psi I_psi D_psi + D_psi,g2 I_g2,psi D_psi + D_psi I_psi,g2 D_g2,psi + D_psi,g2 I_g2 D_g2,psi
/// `psi_size` splits the reduced coordinates.
Eigen::MatrixXd restricted_psi_covariance(const Eigen::MatrixXd& hessian, const Eigen::MatrixXd& opg, int psi_size);

/// Sandwich covariance of a PVQMLE fit, evaluated at its estimate (reduced
/// coordinates for restricted fits).
CovarianceResult fit_covariance(const FitResult& fit, const TimeSeries& series);

/// Least-squares sandwich for CLSE / WLSE estimates of an INAR mean:
/// H = mean x x'/w, I = mean e^2 x x'/w^2. An empty weight path means w = 1.
CovarianceResult least_squares_covariance(const FilterFamily& family, const TimeSeries& series,
                                          const Eigen::VectorXd& psi, const Eigen::VectorXd& weights = {});

struct WaldResult {
  std::string restriction_name;
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  Eigen::VectorXd r_hat;
};

/// W = n r'(R Sigma R')^-1 r at an unrestricted estimate. `eval` must be the
/// Full evaluation at fit.theta_hat.
WaldResult wald_test(const FitResult& fit, const ObjectiveEval& eval, const RestrictionSpec& restriction);

/// Same statistic from raw pieces; `sigma` is the full-coordinate sandwich.
WaldResult wald_statistic(const RestrictionSpec& restriction, const Eigen::VectorXd& theta,
                          const Eigen::MatrixXd& sigma, int n_terms);

struct VarianceRatioRow {
  double a = 0.0;
  double omega = 0.0;
  double log10_ratio_a = 0.0;
  double log10_ratio_omega = 0.0;
};

/// Poisson INAR(1) with binomial thinning: log10 of unrestricted over
/// restricted (binomial+equidispersed) asymptotic variances, both sandwiches
/// evaluated at the true parameter on one simulated path per grid point.
/// Grid point i uses seed + i.
std::vector<VarianceRatioRow> variance_ratio_grid(const std::vector<std::pair<double, double>>& grid, int t_long,
                                                  std::uint64_t seed, int threads = 0);

/// Writes a, omega, log10_ratio_a, log10_ratio_omega.
std::string variance_ratio_csv(const std::vector<VarianceRatioRow>& rows);

}  // namespace pvq
