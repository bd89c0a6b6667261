#include "pvqmle/objective.hpp"

#include <cmath>

#include <fmt/format.h>

#include "pvqmle/filters.hpp"

namespace pvq {

void require_fit_length(const FilterFamily& family, const TimeSeries& series) {
  const int t0 = family.first_usable() + 1;
  const int T = static_cast<int>(series.size());
  if (T < t0 + 5)
    throw Error(fmt::format("series of length {} is too short for family '{}': need at least {} observations",
                            T, family.name(), t0 + 5));
}

ObjectiveEval evaluate(const FilterFamily& family, const Eigen::VectorXd& theta, const TimeSeries& series,
                       EvalLevel level) {
  require_fit_length(family, series);
  const DerivLevel derivs = level == EvalLevel::Value   ? DerivLevel::None
                            : level == EvalLevel::Score ? DerivLevel::Grad
                                                        : DerivLevel::GradHess;
  const FilteredPaths paths = run_filter(family, theta, series, derivs);
  const auto y = series.values();
  const int m = family.size();
  const int T = paths.size();

  ObjectiveEval out;
  out.t0 = paths.valid_from;
  out.n_terms = T - paths.valid_from;
  out.clamped = paths.clamped;
  if (level != EvalLevel::Value) out.score = Eigen::VectorXd::Zero(m);
  if (level == EvalLevel::Full) {
    out.hessian = Eigen::MatrixXd::Zero(m, m);
    out.opg = Eigen::MatrixXd::Zero(m, m);
  }

  double total = 0.0;
  Eigen::VectorXd s(m);
  for (int t = paths.valid_from; t < T; ++t) {
    const double nu = paths.nu_star(t);
    const double e = y[t] - paths.lambda(t);
    const double e2 = e * e;
    total += -0.5 * std::log(nu) - e2 / (2.0 * nu);
    if (level == EvalLevel::Value) continue;

    const auto dl = paths.dlambda.col(t);
    const auto dn = paths.dnu.col(t);
    const double c_mean = e / nu;
    const double c_var = (e2 - nu) / (2.0 * nu * nu);
    s.noalias() = c_mean * dl + c_var * dn;
    out.score += s;
    if (level != EvalLevel::Full) continue;

    out.opg.noalias() += s * s.transpose();
    // Negative second derivative of l_t, accumulated term by term.
    const double c_nn = 1.0 / (2.0 * nu * nu) - e2 / (nu * nu * nu);
    const double c_ln = e / (nu * nu);
    out.hessian.noalias() -= c_nn * dn * dn.transpose();
    out.hessian.noalias() += c_ln * (dl * dn.transpose() + dn * dl.transpose());
    out.hessian.noalias() += (1.0 / nu) * dl * dl.transpose();
    if (paths.has_curvature()) {
      const auto k = static_cast<std::size_t>(t);
      out.hessian.noalias() -= c_mean * paths.d2lambda[k];
      out.hessian.noalias() -= c_var * paths.d2nu[k];
    }
  }

  const double n = static_cast<double>(out.n_terms);
  out.loglik = total / n;
  if (level != EvalLevel::Value) out.score /= n;
  if (level == EvalLevel::Full) {
    out.hessian /= n;
    out.opg /= n;
    out.hessian = 0.5 * (out.hessian + out.hessian.transpose()).eval();
  }
  return out;
}

ObjectiveEval evaluate_restricted(const RestrictionSpec& spec, const Eigen::VectorXd& reduced,
                                  const TimeSeries& series, EvalLevel level) {
  const Eigen::VectorXd theta = spec.expand(reduced);
  ObjectiveEval full = evaluate(spec.family(), theta, series, level);
  if (spec.empty() || level == EvalLevel::Value) return full;

  const Eigen::MatrixXd J = spec.jacobian(reduced);
  ObjectiveEval out;
  out.loglik = full.loglik;
  out.t0 = full.t0;
  out.n_terms = full.n_terms;
  out.clamped = full.clamped;
  out.score = J.transpose() * full.score;
  if (level == EvalLevel::Full) {
    out.hessian = J.transpose() * full.hessian * J;
    const int p = spec.family().psi_size();
    for (const auto& c : spec.coordinates()) {
      const double curvature = link_second_derivative(c.link, reduced(c.psi_index));
      if (curvature != 0.0) out.hessian(c.psi_index, c.psi_index) -= full.score(p + c.gamma_index) * curvature;
    }
    out.opg = J.transpose() * full.opg * J;
  }
  return out;
}

}  // namespace pvq
