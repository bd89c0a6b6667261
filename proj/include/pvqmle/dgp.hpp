#pragma once

#include <cstdint>
#include <random>
#include <variant>
#include <vector>

#include "pvqmle/series.hpp"

namespace pvq {

/// Simulation engine: 64-bit Mersenne Twister seeded with a single integer.
/// Its output sequence is fixed by the C++ standard, and every distribution
/// used on top of it comes from Boost.Random, so draws are identical on every
/// platform. Replication i of an experiment uses seed base_seed + i.
using Rng = std::mt19937_64;

enum class ThinningKind { Binomial, Poisson, Geometric, NegBin, BiNB };

/// Counting-series distribution D_X(a, b) behind a thinning operator a o N.
struct ThinningSpec {
  ThinningKind kind = ThinningKind::Binomial;
  double a = 0.5;   // mean slope; for BiNB it is derived as mu + pi
  double v = 0.0;   // NegBin dispersion
  double mu = 0.0;  // BiNB geometric mean
  double pi = 0.0;  // BiNB Bernoulli probability

  static ThinningSpec binomial(double a);
  static ThinningSpec poisson(double a);
  static ThinningSpec geometric(double a);
  static ThinningSpec negbin(double a, double v);
  static ThinningSpec binb(double mu, double pi);

  double mean_slope() const;
  double variance_slope() const;
  /// 1 - a/b: share of the thinning variance in excess of equidispersion.
  double overdispersion() const { return 1.0 - mean_slope() / variance_slope(); }
  void validate() const;
};

/// NegBin dispersion v giving overdispersion 1 - a/(a + a^2/v) = pct.
double negbin_v_for_overdispersion(double a, double pct);

enum class InnovationKind { Poisson, NegBin };

struct Innovation {
  InnovationKind kind = InnovationKind::Poisson;
  double omega = 1.0;  // mean
  double size = 0.0;   // NegBin size; variance omega + omega^2/size

  double mean() const { return omega; }
  double variance() const;
};

struct InarSpec {
  std::vector<ThinningSpec> thinning;  // one per lag
  Innovation innovation;
};

/// Y_t | F_{t-1} ~ Beta(lambda_t phi, (1 - lambda_t) phi),
/// lambda_t = omega + alpha Y_{t-1} + beta lambda_{t-1}.
struct BetaArSpec {
  double omega = 0.01;
  double alpha = 0.1;
  double beta = 0.8;
  double phi = 20.0;
};

struct DgpSpec {
  std::variant<InarSpec, BetaArSpec> model;
  int burn_in = 500;

  bool is_inar() const { return std::holds_alternative<InarSpec>(model); }
  void validate() const;
};

/// One draw of a o n.
long thin(const ThinningSpec& spec, long n, Rng& rng);

long draw_innovation(const Innovation& innovation, Rng& rng);

TimeSeries simulate(const DgpSpec& spec, int length, std::uint64_t seed);

/// Replaces the middle observation (index floor(T/2), 0-based) by
/// round(mean + 3 sd) of the original series.
TimeSeries inject_outlier(const TimeSeries& series);

}  // namespace pvq
