#include "pvqmle/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/QR>
#include <boost/random/normal_distribution.hpp>
#include <fmt/format.h>

#include "pvqmle/dgp.hpp"
#include "pvqmle/filters.hpp"
#include "pvqmle/objective.hpp"
#include "pvqmle/optimizer.hpp"
#include "pvqmle/transforms.hpp"

namespace pvq {

std::string_view to_string(EstimatorTag tag) {
  switch (tag) {
    case EstimatorTag::PVQMLE: return "PVQMLE";
    case EstimatorTag::PVQMLE_R: return "PVQMLE_R";
    case EstimatorTag::PoissonQMLE: return "PoissonQMLE";
    case EstimatorTag::CLSE: return "CLSE";
    case EstimatorTag::WLSE: return "WLSE";
    case EstimatorTag::WLSE_unfeasible: return "WLSE_unfeasible";
    case EstimatorTag::MLE_PoissonInar1: return "MLE_PoissonInar1";
  }
  return "?";
}

EstimatorTag parse_estimator_tag(std::string_view name) {
  for (auto tag : {EstimatorTag::PVQMLE, EstimatorTag::PVQMLE_R, EstimatorTag::PoissonQMLE, EstimatorTag::CLSE,
                   EstimatorTag::WLSE, EstimatorTag::WLSE_unfeasible, EstimatorTag::MLE_PoissonInar1})
    if (name == to_string(tag)) return tag;
  throw Error(fmt::format("unknown estimator '{}'", name));
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_inar(const FilterFamily& family, std::string_view estimator) {
  if (family.kind != FamilyKind::InarLinear)
    throw Error(fmt::format("{} is only defined for the INAR family", estimator));
}

// Rows (1, Y_{t-1}, ..., Y_{t-p}) for t = p..T-1.
Eigen::MatrixXd lag_design(const TimeSeries& series, int p) {
  const int T = static_cast<int>(series.size());
  Eigen::MatrixXd X(T - p, p + 1);
  for (int t = p; t < T; ++t) {
    X(t - p, 0) = 1.0;
    for (int h = 1; h <= p; ++h) X(t - p, h) = series[static_cast<std::size_t>(t - h)];
  }
  return X;
}

Eigen::VectorXd response(const TimeSeries& series, int p) {
  const int T = static_cast<int>(series.size());
  Eigen::VectorXd y(T - p);
  for (int t = p; t < T; ++t) y(t - p) = series[static_cast<std::size_t>(t)];
  return y;
}

Eigen::VectorXd least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < X.cols()) throw Error("singular design: the regressors are collinear (constant series?)");
  return qr.solve(y);
}

struct Attempt {
  Eigen::VectorXd external;  // optimum in external coordinates
  double f = kInf;
  double grad_norm = kInf;
  int iterations = 0;
  bool converged = false;
};

// BFGS over transformed coordinates with jittered restarts from the best
// point reached so far. `value` gets external coordinates and returns the
// objective to minimize (+inf when infeasible) and its gradient.
Attempt optimize(const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>& value,
                 const std::vector<CoordinateTransform>& tr, Eigen::VectorXd start, const FitOptions& options,
                 int& restarts) {
  for (Eigen::Index i = 0; i < start.size(); ++i) start(i) = tr[static_cast<std::size_t>(i)].clamp_inside(start(i));

  DifferentiableFunction fn = [&](const Eigen::VectorXd& u, Eigen::VectorXd* grad) -> double {
    const Eigen::VectorXd x = to_external(tr, u);
    Eigen::VectorXd gx(x.size());
    const double f = value(x, grad ? &gx : nullptr);
    if (!std::isfinite(f)) return kInf;
    if (grad) *grad = gx.cwiseProduct(transform_derivatives(tr, u));
    return f;
  };

  BfgsOptions bopt;
  bopt.tol_g = options.tol_g;
  bopt.max_iter = options.max_iter;

  Rng rng(options.jitter_seed);
  boost::random::normal_distribution<double> noise(0.0, 1.0);

  Attempt best;
  best.external = start;
  Eigen::VectorXd from = start;
  restarts = 0;
  for (int attempt = 0; attempt <= options.max_restarts; ++attempt) {
    if (attempt > 0) {
      ++restarts;
      from = best.external;
      for (Eigen::Index i = 0; i < from.size(); ++i)
        from(i) = tr[static_cast<std::size_t>(i)].clamp_inside(from(i) * (1.0 + options.jitter * noise(rng)));
    }
    const BfgsResult r = minimize_bfgs(fn, to_internal(tr, from), bopt);
    if (!std::isfinite(r.f)) continue;
    const double gnorm = r.grad.lpNorm<Eigen::Infinity>();
    if (r.converged || r.f < best.f) {
      best.external = to_external(tr, r.x);
      best.f = r.f;
      best.grad_norm = gnorm;
      best.iterations += r.iterations;
      best.converged = r.converged;
    } else {
      best.iterations += r.iterations;
    }
    if (best.converged) break;
  }
  return best;
}

double clamp_coefficient(double a) { return std::clamp(a, 0.01, 0.95); }

}  // namespace

Eigen::VectorXd default_start(const FilterFamily& family, const TimeSeries& series) {
  const double ybar = series.mean();
  const double sd = series.stddev();
  const double var = std::max(sd * sd, 1e-6);
  Eigen::VectorXd theta(family.size());

  if (family.kind == FamilyKind::InarLinear) {
    const int p = family.lags;
    const Eigen::MatrixXd X = lag_design(series, p);
    const Eigen::VectorXd y = response(series, p);
    Eigen::VectorXd psi(p + 1);
    try {
      psi = least_squares(X, y);
    } catch (const Error&) {
      psi.setConstant(0.1);
      psi(0) = std::max(ybar, 0.1);
    }
    double total = 0.0;
    for (int h = 1; h <= p; ++h) total += (psi(h) = clamp_coefficient(psi(h)));
    if (total > 0.95)
      for (int h = 1; h <= p; ++h) psi(h) *= 0.95 / total;
    total = psi.tail(p).sum();
    if (!(psi(0) > 0.0)) psi(0) = std::max(ybar * (1.0 - total), 0.1);

    const Eigen::VectorXd resid = y - X * psi;
    Eigen::VectorXd gamma(p + 1);
    try {
      gamma = least_squares(X, resid.array().square().matrix());
    } catch (const Error&) {
      gamma.setConstant(0.1);
      gamma(0) = var;
    }
    const double mean_sq = resid.squaredNorm() / static_cast<double>(resid.size());
    gamma(0) = std::max(gamma(0), std::max(0.05 * mean_sq, 1e-3));
    for (int h = 1; h <= p; ++h) gamma(h) = std::max(gamma(h), 0.01);
    theta << psi, gamma;
    return theta;
  }

  const double alpha = 0.1, beta = 0.8;
  if (family.kind == FamilyKind::IngarchLinear) {
    const double w1 = std::max(ybar * (1.0 - alpha - beta), 1e-3);
    const double w2 = std::max(var * (1.0 - beta) - alpha * ybar, 1e-3);
    theta << w1, alpha, beta, w2, alpha, beta;
    return theta;
  }
  const double w = std::max(ybar * (1.0 - alpha - beta), 1e-4);
  theta << w, alpha, beta, w, alpha, beta, 1.0;
  // Precision from the residual variance around the start mean path.
  const FilteredPaths paths = run_filter(family, theta, series, DerivLevel::None);
  double ss = 0.0, bern = 0.0;
  for (int t = paths.valid_from; t < paths.size(); ++t) {
    const double lam = paths.lambda(t);
    ss += (series[static_cast<std::size_t>(t)] - lam) * (series[static_cast<std::size_t>(t)] - lam);
    bern += lam * (1.0 - lam);
  }
  theta(6) = std::max(bern / std::max(ss, 1e-12) - 1.0, 1.0);
  return theta;
}

FitResult fit_pvqmle(const FilterFamily& family, const TimeSeries& series,
                     const std::optional<RestrictionSpec>& restriction, const std::optional<Eigen::VectorXd>& start,
                     const FitOptions& options) {
  require_fit_length(family, series);
  const RestrictionSpec spec = restriction.value_or(RestrictionSpec(family, {}));
  if (!(spec.family() == family))
    throw Error(fmt::format("restriction is defined for family '{}', not '{}'", spec.family().name(), family.name()));
  if (family.kind == FamilyKind::BetaVar && series.space() != SampleSpace::UnitInterval)
    throw Error("the beta family requires a unit-interval series");

  Eigen::VectorXd theta0 = start.value_or(default_start(family, series));
  if (start) validate_params(family, *start);
  if (!satisfies_sum_constraints(family, theta0))
    throw Error("starting values violate the persistence constraint");

  const auto tr = reduced_transforms(spec);
  auto value = [&](const Eigen::VectorXd& reduced, Eigen::VectorXd* grad) -> double {
    const Eigen::VectorXd theta = spec.expand(reduced);
    if (!is_admissible(family, theta) || !satisfies_sum_constraints(family, theta)) return kInf;
    const ObjectiveEval ev = evaluate_restricted(spec, reduced, series, grad ? EvalLevel::Score : EvalLevel::Value);
    if (!std::isfinite(ev.loglik)) return kInf;
    if (grad) *grad = -ev.score;
    return -ev.loglik;
  };

  FitResult out;
  out.tag = spec.empty() ? EstimatorTag::PVQMLE : EstimatorTag::PVQMLE_R;
  out.family = family;
  if (restriction) out.restriction = spec;
  const Attempt best = optimize(value, tr, spec.reduce(theta0), options, out.restarts);
  out.reduced_hat = best.external;
  out.theta_hat = ParamVector::from_theta(family, spec.expand(best.external));
  out.converged = best.converged;
  out.iterations = best.iterations;
  out.grad_norm = best.grad_norm;
  const ObjectiveEval ev = evaluate_restricted(spec, best.external, series, EvalLevel::Value);
  out.loglik = ev.loglik;
  out.clamp_flag = ev.clamped;
  out.n_terms = ev.n_terms;
  return out;
}

FitResult fit_clse(const FilterFamily& family, const TimeSeries& series) {
  require_inar(family, "CLSE");
  require_fit_length(family, series);
  const int p = family.lags;
  const Eigen::MatrixXd X = lag_design(series, p);
  const Eigen::VectorXd y = response(series, p);
  const Eigen::VectorXd psi = least_squares(X, y);

  FitResult out;
  out.tag = EstimatorTag::CLSE;
  out.family = family;
  out.theta_hat.psi = psi;
  out.theta_hat.gamma.resize(0);
  const auto names = family.coordinate_names();
  out.theta_hat.names.assign(names.begin(), names.begin() + family.psi_size());
  out.reduced_hat = psi;
  out.n_terms = static_cast<int>(y.size());
  out.loglik = -(y - X * psi).squaredNorm() / static_cast<double>(out.n_terms);
  out.converged = true;
  return out;
}

FitResult fit_wlse(const FilterFamily& family, const TimeSeries& series, const WlseWeights& weights) {
  require_inar(family, "WLSE");
  require_fit_length(family, series);
  const int p = family.lags;
  const int T = static_cast<int>(series.size());
  const Eigen::MatrixXd X = lag_design(series, p);
  const Eigen::VectorXd y = response(series, p);

  Eigen::VectorXd w(T - p);
  if (weights.kind == WlseWeights::Kind::EstimatedBinomial) {
    const Eigen::VectorXd first = fit_clse(family, series).theta_hat.psi;
    Eigen::VectorXd coef(p + 1);
    coef(0) = first(0);
    for (int h = 1; h <= p; ++h) coef(h) = first(h) * (1.0 - first(h));
    w = X * coef;
  } else {
    if (weights.variance_path.size() != T)
      throw Error(fmt::format("variance path has {} entries, series has {}", weights.variance_path.size(), T));
    w = weights.variance_path.tail(T - p);
  }
  w = w.cwiseMax(kPseudoVarianceFloor);
  const Eigen::VectorXd root = w.cwiseSqrt().cwiseInverse();
  const Eigen::VectorXd psi = least_squares(root.asDiagonal() * X, root.cwiseProduct(y));

  FitResult out;
  out.tag = weights.kind == WlseWeights::Kind::EstimatedBinomial ? EstimatorTag::WLSE : EstimatorTag::WLSE_unfeasible;
  out.family = family;
  out.theta_hat.psi = psi;
  out.theta_hat.gamma.resize(0);
  const auto names = family.coordinate_names();
  out.theta_hat.names.assign(names.begin(), names.begin() + family.psi_size());
  out.reduced_hat = psi;
  out.n_terms = static_cast<int>(y.size());
  out.loglik = -(y - X * psi).cwiseProduct(root).squaredNorm() / static_cast<double>(out.n_terms);
  out.converged = true;
  return out;
}

FitResult fit_poisson_qmle(const FilterFamily& family, const TimeSeries& series, const FitOptions& options) {
  if (family.kind == FamilyKind::BetaVar) throw Error("the Poisson QMLE applies to count families only");
  if (series.space() != SampleSpace::Counts) throw Error("the Poisson QMLE needs a count series");
  require_fit_length(family, series);
  const int p = family.psi_size();
  const auto full_tr = family_transforms(family);
  const std::vector<CoordinateTransform> tr(full_tr.begin(), full_tr.begin() + p);
  const auto y = series.values();

  // The pseudo-variance block is irrelevant here; any admissible value works.
  auto with_dummy_gamma = [&](const Eigen::VectorXd& psi) {
    Eigen::VectorXd theta(family.size());
    theta.head(p) = psi;
    theta.tail(family.gamma_size()).setConstant(0.5);
    return theta;
  };

  auto value = [&](const Eigen::VectorXd& psi, Eigen::VectorXd* grad) -> double {
    const Eigen::VectorXd theta = with_dummy_gamma(psi);
    if (!is_admissible(family, theta) || !satisfies_sum_constraints(family, theta)) return kInf;
    const FilteredPaths paths = run_filter(family, theta, series, grad ? DerivLevel::Grad : DerivLevel::None);
    double total = 0.0;
    if (grad) grad->setZero(p);
    for (int t = paths.valid_from; t < paths.size(); ++t) {
      const double lam = paths.lambda(t);
      if (!(lam > 0.0)) return kInf;
      total += y[t] * std::log(lam) - lam;
      if (grad) *grad += (y[t] / lam - 1.0) * paths.dlambda.col(t).head(p);
    }
    const double n = static_cast<double>(paths.size() - paths.valid_from);
    if (grad) *grad /= -n;
    return -total / n;
  };

  FitResult out;
  out.tag = EstimatorTag::PoissonQMLE;
  out.family = family;
  const Eigen::VectorXd start = default_start(family, series).head(p);
  const Attempt best = optimize(value, tr, start, options, out.restarts);
  out.theta_hat.psi = best.external;
  out.theta_hat.gamma.resize(0);
  const auto names = family.coordinate_names();
  out.theta_hat.names.assign(names.begin(), names.begin() + p);
  out.reduced_hat = best.external;
  out.loglik = -best.f;
  out.converged = best.converged;
  out.iterations = best.iterations;
  out.grad_norm = best.grad_norm;
  out.n_terms = static_cast<int>(series.size()) - family.first_usable();
  return out;
}

namespace {

// log-sum-exp over the binomial / Poisson convolution; log_fact(n) = log n!.
template <class LogFactorial>
double log_transition(long y, long x, double a, double omega, const LogFactorial& log_fact, double* d_omega,
                      double* d_a) {
  const long kmax = std::min(x, y);
  const double la = std::log(a), l1a = std::log1p(-a), lw = std::log(omega);
  double peak = -kInf;
  // Two passes: find the largest term, then accumulate relative to it.
  auto term = [&](long k) {
    return log_fact(x) - log_fact(k) - log_fact(x - k) + static_cast<double>(k) * la +
           static_cast<double>(x - k) * l1a - omega + static_cast<double>(y - k) * lw - log_fact(y - k);
  };
  for (long k = 0; k <= kmax; ++k) peak = std::max(peak, term(k));
  double sum = 0.0, s_omega = 0.0, s_a = 0.0;
  for (long k = 0; k <= kmax; ++k) {
    const double wk = std::exp(term(k) - peak);
    sum += wk;
    if (d_omega) s_omega += wk * (static_cast<double>(y - k) / omega - 1.0);
    if (d_a) s_a += wk * (static_cast<double>(k) / a - static_cast<double>(x - k) / (1.0 - a));
  }
  if (d_omega) *d_omega = s_omega / sum;
  if (d_a) *d_a = s_a / sum;
  return peak + std::log(sum);
}

}  // namespace

double inar1_log_transition(long y, long x, double a, double omega, double* d_omega, double* d_a) {
  if (y < 0 || x < 0) throw Error("transition counts must be non-negative");
  if (!(a > 0.0 && a < 1.0) || !(omega > 0.0)) throw Error("transition needs a in (0,1) and omega > 0");
  auto lf = [](long n) { return std::lgamma(static_cast<double>(n) + 1.0); };
  return log_transition(y, x, a, omega, lf, d_omega, d_a);
}

FitResult fit_mle_poisson_inar1(const TimeSeries& series, const FitOptions& options) {
  if (series.space() != SampleSpace::Counts) throw Error("the INAR(1) MLE needs a count series");
  const FilterFamily family = FilterFamily::inar(1);
  require_fit_length(family, series);
  const auto y = series.values();
  const long ymax = static_cast<long>(*std::max_element(y.begin(), y.end()));
  std::vector<double> table(static_cast<std::size_t>(ymax) + 1);
  for (long n = 0; n <= ymax; ++n) table[static_cast<std::size_t>(n)] = std::lgamma(static_cast<double>(n) + 1.0);
  auto lf = [&](long n) { return table[static_cast<std::size_t>(n)]; };

  const auto full_tr = family_transforms(family);
  const std::vector<CoordinateTransform> tr(full_tr.begin(), full_tr.begin() + 2);
  const double n = static_cast<double>(y.size() - 1);

  auto value = [&](const Eigen::VectorXd& psi, Eigen::VectorXd* grad) -> double {
    const double omega = psi(0), a = psi(1);
    if (!(omega > 0.0 && a > 0.0 && a < 1.0)) return kInf;
    double total = 0.0, g_omega = 0.0, g_a = 0.0;
    for (std::size_t t = 1; t < y.size(); ++t) {
      double dw = 0.0, da = 0.0;
      total += log_transition(static_cast<long>(y[t]), static_cast<long>(y[t - 1]), a, omega, lf,
                              grad ? &dw : nullptr, grad ? &da : nullptr);
      g_omega += dw;
      g_a += da;
    }
    if (grad) {
      grad->resize(2);
      (*grad) << -g_omega / n, -g_a / n;
    }
    return -total / n;
  };

  FitResult out;
  out.tag = EstimatorTag::MLE_PoissonInar1;
  out.family = family;
  Eigen::VectorXd start = default_start(family, series).head(2);
  const Attempt best = optimize(value, tr, start, options, out.restarts);
  out.theta_hat.psi = best.external;
  out.theta_hat.gamma.resize(0);
  out.theta_hat.names = {"omega1", "a"};
  out.reduced_hat = best.external;
  out.loglik = -best.f;
  out.converged = best.converged;
  out.iterations = best.iterations;
  out.grad_norm = best.grad_norm;
  out.n_terms = static_cast<int>(n);
  return out;
}

}  // namespace pvq
