#include "pvqmle/transforms.hpp"

#include <algorithm>
#include <cmath>

namespace pvq {

namespace {
constexpr double kOmegaFloor = 1e-6;
constexpr double kCoefficientCap = 0.999;
}  // namespace

double CoordinateTransform::to_external(double u) const {
  if (!bounded()) return lower + std::exp(u);
  const double s = u >= 0.0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u));
  return lower + (upper - lower) * s;
}

double CoordinateTransform::to_internal(double x) const {
  if (!bounded()) return std::log(x - lower);
  const double s = (x - lower) / (upper - lower);
  return std::log(s / (1.0 - s));
}

double CoordinateTransform::derivative(double u) const {
  if (!bounded()) return std::exp(u);
  const double s = u >= 0.0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u));
  return (upper - lower) * s * (1.0 - s);
}

double CoordinateTransform::clamp_inside(double x) const {
  if (!bounded()) {
    const double margin = 1e-4 * std::max(1.0, std::abs(lower));
    return std::max(x, lower + margin);
  }
  const double margin = 1e-3 * (upper - lower);
  return std::clamp(x, lower + margin, upper - margin);
}

std::vector<CoordinateTransform> family_transforms(const FilterFamily& family) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<CoordinateTransform> out;
  if (family.kind == FamilyKind::InarLinear) {
    out.push_back({kOmegaFloor, inf});
    for (int h = 0; h < family.lags; ++h) out.push_back({0.0, kCoefficientCap});
    out.push_back({kOmegaFloor, inf});
    for (int h = 0; h < family.lags; ++h) out.push_back({0.0, inf});
    return out;
  }
  if (family.kind == FamilyKind::IngarchLinear) {
    for (int block = 0; block < 2; ++block) {
      out.push_back({kOmegaFloor, inf});
      out.push_back({0.0, 1.0});
      out.push_back({0.0, 1.0});
    }
    return out;
  }
  for (int i = 0; i < 6; ++i) out.push_back({0.0, 1.0});
  out.push_back({kOmegaFloor, inf});
  return out;
}

std::vector<CoordinateTransform> reduced_transforms(const RestrictionSpec& spec) {
  const auto full = family_transforms(spec.family());
  const int p = spec.family().psi_size();
  std::vector<CoordinateTransform> out(full.begin(), full.begin() + p);
  for (int j : spec.free_gamma_indices()) out.push_back(full[static_cast<std::size_t>(p + j)]);
  return out;
}

bool satisfies_sum_constraints(const FilterFamily& family, const Eigen::VectorXd& theta) {
  if (family.kind == FamilyKind::InarLinear) return true;
  for (int block = 0; block < 2; ++block) {
    const double persistence = family.kind == FamilyKind::BetaVar
                                   ? theta(3 * block) + theta(3 * block + 1) + theta(3 * block + 2)
                                   : theta(3 * block + 1) + theta(3 * block + 2);
    if (!(persistence < 1.0)) return false;
  }
  return true;
}

Eigen::VectorXd to_external(const std::vector<CoordinateTransform>& tr, const Eigen::VectorXd& u) {
  Eigen::VectorXd x(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) x(i) = tr[static_cast<std::size_t>(i)].to_external(u(i));
  return x;
}

Eigen::VectorXd to_internal(const std::vector<CoordinateTransform>& tr, const Eigen::VectorXd& x) {
  Eigen::VectorXd u(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) u(i) = tr[static_cast<std::size_t>(i)].to_internal(x(i));
  return u;
}

Eigen::VectorXd transform_derivatives(const std::vector<CoordinateTransform>& tr, const Eigen::VectorXd& u) {
  Eigen::VectorXd d(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) d(i) = tr[static_cast<std::size_t>(i)].derivative(u(i));
  return d;
}

}  // namespace pvq
