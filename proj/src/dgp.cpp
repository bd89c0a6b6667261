#include "pvqmle/dgp.hpp"

#include <cmath>
#include <limits>

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/beta_distribution.hpp>
#include <boost/random/binomial_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/geometric_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <fmt/format.h>

namespace pvq {

ThinningSpec ThinningSpec::binomial(double a) { return {ThinningKind::Binomial, a, 0.0, 0.0, 0.0}; }
ThinningSpec ThinningSpec::poisson(double a) { return {ThinningKind::Poisson, a, 0.0, 0.0, 0.0}; }
ThinningSpec ThinningSpec::geometric(double a) { return {ThinningKind::Geometric, a, 0.0, 0.0, 0.0}; }
ThinningSpec ThinningSpec::negbin(double a, double v) { return {ThinningKind::NegBin, a, v, 0.0, 0.0}; }
ThinningSpec ThinningSpec::binb(double mu, double pi) { return {ThinningKind::BiNB, mu + pi, 0.0, mu, pi}; }

double ThinningSpec::mean_slope() const {
  return kind == ThinningKind::BiNB ? mu + pi : a;
}

double ThinningSpec::variance_slope() const {
  switch (kind) {
    case ThinningKind::Binomial: return a * (1.0 - a);
    case ThinningKind::Poisson: return a;
    case ThinningKind::Geometric: return a + a * a;
    case ThinningKind::NegBin: return a + a * a / v;
    // Bernoulli(pi) plus geometric with mean mu (variance mu(1 + mu)).
    case ThinningKind::BiNB: return pi * (1.0 - pi) + mu * (1.0 + mu);
  }
  return a;
}

void ThinningSpec::validate() const {
  switch (kind) {
    case ThinningKind::Binomial:
      if (!(a > 0.0 && a < 1.0)) throw Error(fmt::format("binomial thinning needs a in (0,1), got {}", a));
      break;
    case ThinningKind::Poisson:
    case ThinningKind::Geometric:
      if (!(a > 0.0)) throw Error(fmt::format("thinning mean a must be > 0, got {}", a));
      break;
    case ThinningKind::NegBin:
      if (!(a > 0.0)) throw Error(fmt::format("thinning mean a must be > 0, got {}", a));
      if (!(v > 0.0)) throw Error(fmt::format("negative binomial dispersion v must be > 0, got {}", v));
      break;
    case ThinningKind::BiNB:
      if (!(mu > 0.0) || !(pi >= 0.0) || !(mu + pi < 1.0))
        throw Error(fmt::format("BiNB thinning needs mu > 0, pi >= 0, mu + pi < 1 (mu={}, pi={})", mu, pi));
      break;
  }
}

double negbin_v_for_overdispersion(double a, double pct) {
  if (!(pct > 0.0 && pct < 1.0))
    throw Error(fmt::format("overdispersion share must lie in (0,1), got {}", pct));
  const double b = a / (1.0 - pct);
  return a * a / (b - a);
}

double Innovation::variance() const {
  return kind == InnovationKind::Poisson ? omega : omega + omega * omega / size;
}

void DgpSpec::validate() const {
  if (burn_in < 0) throw Error("burn_in must be >= 0");
  if (const auto* inar = std::get_if<InarSpec>(&model)) {
    if (inar->thinning.empty()) throw Error("an INAR specification needs at least one lag");
    double total = 0.0;
    for (const auto& th : inar->thinning) {
      th.validate();
      total += th.mean_slope();
    }
    if (!(total < 1.0)) throw Error(fmt::format("non-stationary INAR: sum of thinning means {} >= 1", total));
    if (!(inar->innovation.omega > 0.0)) throw Error("innovation mean must be > 0");
    if (inar->innovation.kind == InnovationKind::NegBin && !(inar->innovation.size > 0.0))
      throw Error("negative binomial innovation size must be > 0");
    return;
  }
  const auto& b = std::get<BetaArSpec>(model);
  if (!(b.omega > 0.0 && b.alpha >= 0.0 && b.beta >= 0.0))
    throw Error("beta autoregression needs omega > 0, alpha >= 0, beta >= 0");
  if (!(b.omega + b.alpha + b.beta < 1.0))
    throw Error(fmt::format("non-stationary beta autoregression: omega+alpha+beta = {} >= 1",
                            b.omega + b.alpha + b.beta));
  if (!(b.phi > 0.0)) throw Error("beta precision phi must be > 0");
}

namespace {

long poisson_draw(double mean, Rng& rng) {
  if (mean <= 0.0) return 0;
  return boost::random::poisson_distribution<long, double>(mean)(rng);
}

// Gamma-Poisson mixture: mean m, size k (variance m + m^2/k).
long negbin_draw(double size, double mean, Rng& rng) {
  if (mean <= 0.0) return 0;
  const double rate = boost::random::gamma_distribution<double>(size, mean / size)(rng);
  return poisson_draw(rate, rng);
}

long geometric_draw(double mean, Rng& rng) {
  // Failures before the first success, success probability 1/(1+mean).
  return boost::random::geometric_distribution<long, double>(1.0 / (1.0 + mean))(rng);
}

}  // namespace

long thin(const ThinningSpec& spec, long n, Rng& rng) {
  if (n <= 0) return 0;
  switch (spec.kind) {
    case ThinningKind::Binomial:
      return boost::random::binomial_distribution<long, double>(n, spec.a)(rng);
    case ThinningKind::Poisson:
      return poisson_draw(spec.a * static_cast<double>(n), rng);
    case ThinningKind::Geometric: {
      long total = 0;
      for (long j = 0; j < n; ++j) total += geometric_draw(spec.a, rng);
      return total;
    }
    case ThinningKind::NegBin:
      return negbin_draw(spec.v * static_cast<double>(n), spec.a * static_cast<double>(n), rng);
    case ThinningKind::BiNB: {
      boost::random::bernoulli_distribution<double> coin(spec.pi);
      long total = 0;
      for (long j = 0; j < n; ++j) total += (coin(rng) ? 1 : 0) + geometric_draw(spec.mu, rng);
      return total;
    }
  }
  return 0;
}

long draw_innovation(const Innovation& innovation, Rng& rng) {
  if (innovation.kind == InnovationKind::Poisson) return poisson_draw(innovation.omega, rng);
  return negbin_draw(innovation.size, innovation.omega, rng);
}

namespace {

TimeSeries simulate_inar(const InarSpec& spec, int length, int burn_in, Rng& rng) {
  const auto p = spec.thinning.size();
  std::vector<long> history(p, 0);  // history[h-1] = Y_{t-h}
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(length));
  const long total = static_cast<long>(burn_in) + length;
  for (long t = 0; t < total; ++t) {
    long y = draw_innovation(spec.innovation, rng);
    for (std::size_t h = 0; h < p; ++h) y += thin(spec.thinning[h], history[h], rng);
    for (std::size_t h = p; h-- > 1;) history[h] = history[h - 1];
    history[0] = y;
    if (t >= burn_in) out.push_back(static_cast<double>(y));
  }
  return TimeSeries(std::move(out), SampleSpace::Counts);
}

TimeSeries simulate_beta(const BetaArSpec& spec, int length, int burn_in, Rng& rng) {
  double lambda = spec.omega / (1.0 - spec.alpha - spec.beta);
  double y_prev = lambda;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(length));
  const long total = static_cast<long>(burn_in) + length;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (long t = 0; t < total; ++t) {
    lambda = spec.omega + spec.alpha * y_prev + spec.beta * lambda;
    double y = boost::random::beta_distribution<double>(lambda * spec.phi, (1.0 - lambda) * spec.phi)(rng);
    // Keep draws strictly inside (0,1) when the sampler rounds to a bound.
    y = std::min(std::max(y, eps), 1.0 - eps);
    y_prev = y;
    if (t >= burn_in) out.push_back(y);
  }
  return TimeSeries(std::move(out), SampleSpace::UnitInterval);
}

}  // namespace

TimeSeries simulate(const DgpSpec& spec, int length, std::uint64_t seed) {
  spec.validate();
  if (length < 2) throw Error(fmt::format("simulation length must be >= 2, got {}", length));
  Rng rng(seed);
  if (const auto* inar = std::get_if<InarSpec>(&spec.model)) return simulate_inar(*inar, length, spec.burn_in, rng);
  return simulate_beta(std::get<BetaArSpec>(spec.model), length, spec.burn_in, rng);
}

TimeSeries inject_outlier(const TimeSeries& series) {
  if (series.space() != SampleSpace::Counts) throw Error("outlier injection needs a count series");
  std::vector<double> values(series.values().begin(), series.values().end());
  values[values.size() / 2] = std::round(series.mean() + 3.0 * series.stddev());
  return TimeSeries(std::move(values), SampleSpace::Counts);
}

}  // namespace pvq
