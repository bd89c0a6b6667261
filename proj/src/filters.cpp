#include "pvqmle/filters.hpp"

#include <fstream>

#include <fmt/format.h>

namespace pvq {

namespace {

void check_length(const FilterFamily& family, const TimeSeries& series) {
  if (static_cast<int>(series.size()) <= family.first_usable())
    throw Error(fmt::format("series of length {} is too short for family '{}' (first usable index {})",
                            series.size(), family.name(), family.first_usable() + 1));
}

void allocate(FilteredPaths& out, int m, int T, DerivLevel derivs, bool curvature) {
  out.lambda = Eigen::VectorXd::Zero(T);
  out.nu_star = Eigen::VectorXd::Zero(T);
  if (derivs != DerivLevel::None) {
    out.dlambda = Eigen::MatrixXd::Zero(m, T);
    out.dnu = Eigen::MatrixXd::Zero(m, T);
  }
  if (derivs == DerivLevel::GradHess && curvature) {
    out.d2lambda.assign(static_cast<std::size_t>(T), Eigen::MatrixXd::Zero(m, m));
    out.d2nu.assign(static_cast<std::size_t>(T), Eigen::MatrixXd::Zero(m, m));
  }
}

// Floors nu*_t; the clamped value is constant in theta so its derivatives vanish.
void apply_floor(FilteredPaths& out, int t, DerivLevel derivs) {
  if (out.nu_star(t) >= kPseudoVarianceFloor) return;
  out.nu_star(t) = kPseudoVarianceFloor;
  out.clamped = true;
  if (derivs != DerivLevel::None) out.dnu.col(t).setZero();
  if (!out.d2nu.empty()) out.d2nu[static_cast<std::size_t>(t)].setZero();
}

FilteredPaths run_inar(const FilterFamily& family, const Eigen::VectorXd& theta, std::span<const double> y,
                       DerivLevel derivs) {
  const int p = family.lags;
  const int T = static_cast<int>(y.size());
  FilteredPaths out;
  out.valid_from = p;
  allocate(out, family.size(), T, derivs, false);
  const double w1 = theta(0), w2 = theta(p + 1);
  for (int t = p; t < T; ++t) {
    double lam = w1, nu = w2;
    for (int h = 1; h <= p; ++h) {
      lam += theta(h) * y[t - h];
      nu += theta(p + 1 + h) * y[t - h];
    }
    out.lambda(t) = lam;
    out.nu_star(t) = nu;
    if (derivs != DerivLevel::None) {
      out.dlambda(0, t) = 1.0;
      out.dnu(p + 1, t) = 1.0;
      for (int h = 1; h <= p; ++h) {
        out.dlambda(h, t) = y[t - h];
        out.dnu(p + 1 + h, t) = y[t - h];
      }
    }
    apply_floor(out, t, derivs);
  }
  return out;
}

// Linear recursion x_t = w + al*Y_{t-1} + be*x_{t-1} on coordinates
// [offset, offset+3), written into (state, grad, hess).
struct Recursion {
  int offset;
  double w, al, be;
};

FilteredPaths run_recursive(const FilterFamily& family, const Eigen::VectorXd& theta, std::span<const double> y,
                            double init, DerivLevel derivs) {
  const int m = family.size();
  const int T = static_cast<int>(y.size());
  const bool beta = family.kind == FamilyKind::BetaVar;
  const bool grad = derivs != DerivLevel::None;
  const bool hess = derivs == DerivLevel::GradHess;

  FilteredPaths out;
  out.valid_from = 1;
  allocate(out, m, T, derivs, true);

  const Recursion mean{0, theta(0), theta(1), theta(2)};
  const Recursion var{3, theta(3), theta(4), theta(5)};
  const double phi = beta ? theta(6) : 0.0;
  const int phi_index = 6;

  Eigen::VectorXd mu(T);
  Eigen::MatrixXd dmu;
  std::vector<Eigen::MatrixXd> d2mu;
  if (grad) dmu = Eigen::MatrixXd::Zero(m, T);
  if (hess) d2mu.assign(static_cast<std::size_t>(T), Eigen::MatrixXd::Zero(m, m));

  out.lambda(0) = init;
  mu(0) = init;

  auto step = [&](const Recursion& r, Eigen::VectorXd& state, Eigen::MatrixXd& d, std::vector<Eigen::MatrixXd>& d2,
                  int t) {
    state(t) = r.w + r.al * y[t - 1] + r.be * state(t - 1);
    if (!grad) return;
    d.col(t) = r.be * d.col(t - 1);
    d(r.offset, t) += 1.0;
    d(r.offset + 1, t) += y[t - 1];
    d(r.offset + 2, t) += state(t - 1);
    if (!hess) return;
    const auto k = static_cast<std::size_t>(t);
    d2[k] = r.be * d2[k - 1];
    d2[k].row(r.offset + 2) += d.col(t - 1).transpose();
    d2[k].col(r.offset + 2) += d.col(t - 1);
  };

  for (int t = 1; t < T; ++t) {
    step(mean, out.lambda, out.dlambda, out.d2lambda, t);
    step(var, mu, dmu, d2mu, t);
    const auto k = static_cast<std::size_t>(t);
    if (!beta) {
      out.nu_star(t) = mu(t);
      if (grad) out.dnu.col(t) = dmu.col(t);
      if (hess) out.d2nu[k] = d2mu[k];
    } else {
      const double u = mu(t);
      const double s = 1.0 + phi;
      out.nu_star(t) = u * (1.0 - u) / s;
      if (grad) {
        const double nu_u = (1.0 - 2.0 * u) / s;
        const double nu_phi = -u * (1.0 - u) / (s * s);
        out.dnu.col(t) = nu_u * dmu.col(t);
        out.dnu(phi_index, t) += nu_phi;
        if (hess) {
          const double nu_uu = -2.0 / s;
          const double nu_uphi = -(1.0 - 2.0 * u) / (s * s);
          const double nu_phiphi = 2.0 * u * (1.0 - u) / (s * s * s);
          Eigen::MatrixXd& H = out.d2nu[k];
          H = nu_uu * dmu.col(t) * dmu.col(t).transpose() + nu_u * d2mu[k];
          H.row(phi_index) += nu_uphi * dmu.col(t).transpose();
          H.col(phi_index) += nu_uphi * dmu.col(t);
          H(phi_index, phi_index) += nu_phiphi;
        }
      }
    }
    apply_floor(out, t, derivs);
  }
  return out;
}

}  // namespace

FilteredPaths run_filter(const FilterFamily& family, const Eigen::VectorXd& theta, const TimeSeries& series,
                         DerivLevel derivs) {
  validate_params(family, theta);
  check_length(family, series);
  if (family.kind == FamilyKind::BetaVar && series.space() != SampleSpace::UnitInterval)
    throw Error("the beta family requires a unit-interval series");
  if (family.kind == FamilyKind::InarLinear) return run_inar(family, theta, series.values(), derivs);
  return run_recursive(family, theta, series.values(), series.mean(), derivs);
}

void write_paths_csv(const FilteredPaths& paths, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out << "t,lambda,nu_star\n";
  for (int t = paths.valid_from; t < paths.size(); ++t)
    out << fmt::format("{},{},{}\n", t + 1, paths.lambda(t), paths.nu_star(t));
}

}  // namespace pvq
