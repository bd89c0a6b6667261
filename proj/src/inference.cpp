#include "pvqmle/inference.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "pvqmle/dgp.hpp"
#include "pvqmle/parallel.hpp"
#include "pvqmle/special.hpp"

namespace pvq {

Eigen::MatrixXd symmetric_inverse(const Eigen::MatrixXd& a, bool* pseudo, bool* indefinite, double* condition) {
  if (a.rows() != a.cols()) throw Error("symmetric_inverse needs a square matrix");
  if (!a.allFinite()) throw Error("matrix to invert has non-finite entries");
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  const Eigen::VectorXd& lam = eig.eigenvalues();
  const double top = lam.cwiseAbs().maxCoeff();
  const double cutoff = kPseudoInverseCutoff * top;
  bool any_pseudo = !(top > 0.0), any_negative = false;
  Eigen::VectorXd inv(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (std::abs(lam(i)) <= cutoff || !(top > 0.0)) {
      inv(i) = 0.0;
      any_pseudo = true;
    } else {
      if (lam(i) < 0.0) any_negative = true;
      inv(i) = 1.0 / lam(i);
    }
  }
  if (pseudo) *pseudo = any_pseudo;
  if (indefinite) *indefinite = any_negative;
  if (condition) {
    const double bottom = lam.cwiseAbs().minCoeff();
    *condition = bottom > 0.0 ? top / bottom : std::numeric_limits<double>::infinity();
  }
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

CovarianceResult sandwich(const Eigen::MatrixXd& hessian, const Eigen::MatrixXd& opg, int n_terms) {
  if (hessian.rows() != opg.rows() || hessian.cols() != opg.cols())
    throw Error("sandwich: H and I have different shapes");
  if (n_terms <= 0) throw Error("sandwich: n_terms must be positive");
  CovarianceResult out;
  bool pseudo = false;
  const Eigen::MatrixXd hinv = symmetric_inverse(hessian, &pseudo, &out.indefinite, &out.condition_number);
  out.psd_flag = pseudo || out.indefinite;
  out.sigma = hinv * opg * hinv;
  out.sigma = 0.5 * (out.sigma + out.sigma.transpose()).eval();
  out.n_terms = n_terms;
  out.se = (out.sigma.diagonal().cwiseMax(0.0) / static_cast<double>(n_terms)).cwiseSqrt();
  return out;
}

CovarianceResult sandwich(const ObjectiveEval& eval) {
  if (eval.hessian.size() == 0 || eval.opg.size() == 0)
    throw Error("sandwich needs an objective evaluated at the Full level");
  return sandwich(eval.hessian, eval.opg, eval.n_terms);
}

Eigen::MatrixXd restricted_psi_covariance(const Eigen::MatrixXd& hessian, const Eigen::MatrixXd& opg, int psi_size) {
  const Eigen::Index m = hessian.rows();
  if (psi_size <= 0 || psi_size > m) throw Error("restricted_psi_covariance: bad psi size");
  const Eigen::Index k = m - psi_size;
  const Eigen::MatrixXd D = symmetric_inverse(hessian);
  const auto Dp = D.topLeftCorner(psi_size, psi_size);
  const auto Dpg = D.topRightCorner(psi_size, k);
  const auto Dgp = D.bottomLeftCorner(k, psi_size);
  const auto Ip = opg.topLeftCorner(psi_size, psi_size);
  const auto Ipg = opg.topRightCorner(psi_size, k);
  const auto Igp = opg.bottomLeftCorner(k, psi_size);
  const auto Ig = opg.bottomRightCorner(k, k);
  Eigen::MatrixXd out = Dp * Ip * Dp;
  if (k > 0) out += Dpg * Igp * Dp + Dp * Ipg * Dgp + Dpg * Ig * Dgp;
  return out;
}

CovarianceResult fit_covariance(const FitResult& fit, const TimeSeries& series) {
  if (fit.tag != EstimatorTag::PVQMLE && fit.tag != EstimatorTag::PVQMLE_R)
    throw Error(fmt::format("fit_covariance applies to PVQMLE fits, not {}", to_string(fit.tag)));
  if (fit.restricted()) return sandwich(evaluate_restricted(*fit.restriction, fit.reduced_hat, series, EvalLevel::Full));
  return sandwich(evaluate(fit.family, fit.theta_hat.theta(), series, EvalLevel::Full));
}

CovarianceResult least_squares_covariance(const FilterFamily& family, const TimeSeries& series,
                                          const Eigen::VectorXd& psi, const Eigen::VectorXd& weights) {
  if (family.kind != FamilyKind::InarLinear) throw Error("least-squares covariance is defined for INAR only");
  const int p = family.lags;
  const int T = static_cast<int>(series.size());
  if (psi.size() != p + 1) throw Error("least-squares covariance: psi has the wrong length");
  if (weights.size() != 0 && weights.size() != T) throw Error("least-squares covariance: weight path length != T");
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(p + 1, p + 1), I = H;
  Eigen::VectorXd x(p + 1);
  for (int t = p; t < T; ++t) {
    x(0) = 1.0;
    for (int h = 1; h <= p; ++h) x(h) = series[static_cast<std::size_t>(t - h)];
    const double w = weights.size() ? std::max(weights(t), 1e-8) : 1.0;
    const double e = series[static_cast<std::size_t>(t)] - x.dot(psi);
    H.noalias() += x * x.transpose() / w;
    I.noalias() += (e * e / (w * w)) * x * x.transpose();
  }
  const double n = T - p;
  return sandwich(H / n, I / n, T - p);
}

WaldResult wald_statistic(const RestrictionSpec& restriction, const Eigen::VectorXd& theta,
                          const Eigen::MatrixXd& sigma, int n_terms) {
  if (restriction.empty()) throw Error("wald test needs at least one restriction");
  WaldResult out;
  out.restriction_name = restriction.name();
  out.dof = restriction.count();
  out.r_hat = restriction.residual(theta);
  const Eigen::MatrixXd R = restriction.residual_jacobian(theta);
  const Eigen::MatrixXd V = R * sigma * R.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (V + V.transpose()));
  const Eigen::VectorXd& lam = eig.eigenvalues();
  if (!V.allFinite() || !(lam.minCoeff() > kPseudoInverseCutoff * std::max(lam.maxCoeff(), 0.0)) ||
      !(lam.maxCoeff() > 0.0))
    throw Error(fmt::format("R Sigma R' is singular for restriction '{}'", out.restriction_name));
  const Eigen::VectorXd z = eig.eigenvectors().transpose() * out.r_hat;
  out.statistic = static_cast<double>(n_terms) * (z.array().square() / lam.array()).sum();
  out.p_value = chi2_sf(out.statistic, out.dof);
  return out;
}

WaldResult wald_test(const FitResult& fit, const ObjectiveEval& eval, const RestrictionSpec& restriction) {
  if (fit.restricted()) throw Error("the Wald test is based on the unrestricted estimator");
  if (!(restriction.family() == fit.family)) throw Error("restriction and fit belong to different families");
  const CovarianceResult cov = sandwich(eval);
  return wald_statistic(restriction, fit.theta_hat.theta(), cov.sigma, eval.n_terms);
}

std::vector<VarianceRatioRow> variance_ratio_grid(const std::vector<std::pair<double, double>>& grid, int t_long,
                                                  std::uint64_t seed, int threads) {
  const FilterFamily family = FilterFamily::inar(1);
  const RestrictionSpec r3(family, {RestrictionKind::BinomialThinning, RestrictionKind::EquidispersedError});
  std::vector<VarianceRatioRow> rows(grid.size());
  for (const auto& [a, omega] : grid)
    if (!(a > 0.0 && a < 1.0) || !(omega > 0.0))
      throw Error(fmt::format("grid point (a={}, omega={}) is not stationary", a, omega));

  parallel_for(static_cast<int>(grid.size()), threads, [&](int i) {
    const auto [a, omega] = grid[static_cast<std::size_t>(i)];
    DgpSpec dgp;
    dgp.model = InarSpec{{ThinningSpec::binomial(a)}, Innovation{InnovationKind::Poisson, omega, 0.0}};
    const TimeSeries y = simulate(dgp, t_long, seed + static_cast<std::uint64_t>(i));
    Eigen::VectorXd theta(4);
    theta << omega, a, omega, a * (1.0 - a);
    const CovarianceResult full = sandwich(evaluate(family, theta, y, EvalLevel::Full));
    const CovarianceResult restricted = sandwich(evaluate_restricted(r3, r3.reduce(theta), y, EvalLevel::Full));
    rows[static_cast<std::size_t>(i)] = {a, omega, std::log10(full.sigma(1, 1) / restricted.sigma(1, 1)),
                                         std::log10(full.sigma(0, 0) / restricted.sigma(0, 0))};
  });
  return rows;
}

std::string variance_ratio_csv(const std::vector<VarianceRatioRow>& rows) {
  std::string out = "a,omega,log10_ratio_a,log10_ratio_omega\n";
  for (const auto& r : rows)
    out += fmt::format("{:.6f},{:.6f},{:.10f},{:.10f}\n", r.a, r.omega, r.log10_ratio_a, r.log10_ratio_omega);
  return out;
}

}  // namespace pvq
