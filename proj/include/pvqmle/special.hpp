#pragma once

namespace pvq {

/// Regularized lower incomplete gamma P(s, x) = gamma(s, x) / Gamma(s).
double gamma_p(double s, double x);

/// Regularized upper incomplete gamma Q(s, x) = 1 - P(s, x), computed
/// directly (no cancellation) in the tail.
double gamma_q(double s, double x);

/// Upper tail of the chi-square distribution with `dof` degrees of freedom.
double chi2_sf(double x, double dof);

/// Lower tail of the chi-square distribution.
double chi2_cdf(double x, double dof);

}  // namespace pvq
