#include "pvqmle/special.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "pvqmle/series.hpp"

namespace pvq {

namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxTerms = 10000;

double log_prefactor(double s, double x) { return s * std::log(x) - x - std::lgamma(s); }

// sum_{n>=0} x^n / (s (s+1) ... (s+n)), converges fast for x < s + 1.
double lower_series(double s, double x) {
  double term = 1.0 / s, sum = term;
  for (int n = 1; n < kMaxTerms; ++n) {
    term *= x / (s + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(log_prefactor(s, x));
}

// Modified Lentz evaluation of the continued fraction for Q, x >= s + 1.
double upper_fraction(double s, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(log_prefactor(s, x)) * h;
}

void check_args(double s, double x) {
  if (!(s > 0.0) || !std::isfinite(s)) throw Error(fmt::format("incomplete gamma needs shape > 0, got {}", s));
  if (!(x >= 0.0)) throw Error(fmt::format("incomplete gamma needs x >= 0, got {}", x));
}

}  // namespace

double gamma_p(double s, double x) {
  check_args(s, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return x < s + 1.0 ? lower_series(s, x) : 1.0 - upper_fraction(s, x);
}

double gamma_q(double s, double x) {
  check_args(s, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return x < s + 1.0 ? 1.0 - lower_series(s, x) : upper_fraction(s, x);
}

double chi2_sf(double x, double dof) {
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * dof, 0.5 * x);
}

double chi2_cdf(double x, double dof) {
  if (x <= 0.0) return 0.0;
  return gamma_p(0.5 * dof, 0.5 * x);
}

}  // namespace pvq
