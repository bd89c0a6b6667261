#pragma once

#include <Eigen/Core>

#include "pvqmle/family.hpp"
#include "pvqmle/restriction.hpp"
#include "pvqmle/series.hpp"

namespace pvq {

enum class EvalLevel { Value, Score, Full };

/// Gaussian pseudo-variance quasi-likelihood and its derivatives, averaged
/// over the n_terms usable observations.
///
///   l_t = -1/2 log nu*_t - (Y_t - lambda_t)^2 / (2 nu*_t)
///
/// hessian is the *negative* average second derivative; opg is the average
/// outer product of per-term scores.
struct ObjectiveEval {
  double loglik = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd hessian;
  Eigen::MatrixXd opg;
  int t0 = 0;
  int n_terms = 0;
  bool clamped = false;
};

/// Throws unless T >= t0 + 5 (1-based t0), the shortest series a fit accepts.
void require_fit_length(const FilterFamily& family, const TimeSeries& series);

ObjectiveEval evaluate(const FilterFamily& family, const Eigen::VectorXd& theta, const TimeSeries& series,
                       EvalLevel level);

/// Same objective in reduced coordinates (psi, gamma_2): value at the expanded
/// theta, score J' s and hessian J' H J - sum_j s_{gamma1_j} d2g_j.
ObjectiveEval evaluate_restricted(const RestrictionSpec& spec, const Eigen::VectorXd& reduced,
                                  const TimeSeries& series, EvalLevel level);

}  // namespace pvq
