#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "pvqmle/family.hpp"

namespace pvq {

/// Built-in restriction maps S*gamma = g(psi).
enum class RestrictionKind {
  BinomialThinning,    // b_h = a_h (1 - a_h)
  PoissonThinning,     // b_h = a_h
  GeometricThinning,   // b_h = a_h + a_h^2
  EquidispersedError,  // omega2 = omega1
  EqualAlpha,          // alpha2 = alpha1
  EqualBeta,           // beta2 = beta1
  FullEqual,           // (omega2, alpha2, beta2) = (omega1, alpha1, beta1)
};

std::string_view to_string(RestrictionKind kind);
RestrictionKind parse_restriction_kind(std::string_view name);

/// Scalar link used by every built-in g component: gamma_j = f(psi_i).
enum class Link { Identity, Binomial, Geometric };

double link_value(Link link, double x);
double link_derivative(Link link, double x);
double link_second_derivative(Link link, double x);

struct RestrictedCoordinate {
  int gamma_index;  // 0-based position within gamma
  int psi_index;    // 0-based position within psi
  Link link;
};

/// g(psi) for one named restriction, in restricted-index order, plus dg/dpsi'.
struct RestrictionValue {
  std::vector<int> gamma_indices;
  Eigen::VectorXd values;
  Eigen::MatrixXd jacobian;  // r x p
};

RestrictionValue restriction_map(RestrictionKind kind, const FilterFamily& family, const Eigen::VectorXd& psi);

/// A set of atomic restrictions applied jointly. The restricted gamma
/// coordinates (gamma_1) are replaced by g(psi); the rest (gamma_2) stay free.
/// Reduced coordinates are (psi, gamma_2) in layout order.
class RestrictionSpec {
 public:
  RestrictionSpec() = default;
  RestrictionSpec(FilterFamily family, std::vector<RestrictionKind> kinds);

  /// "" or "none" for the empty set, otherwise atoms joined by '+',
  /// e.g. "binomial+equidispersed".
  static RestrictionSpec parse(const FilterFamily& family, std::string_view text);

  const FilterFamily& family() const noexcept { return family_; }
  const std::vector<RestrictionKind>& kinds() const noexcept { return kinds_; }
  const std::vector<RestrictedCoordinate>& coordinates() const noexcept { return coords_; }
  const std::vector<int>& free_gamma_indices() const noexcept { return free_; }

  bool empty() const noexcept { return coords_.empty(); }
  int count() const noexcept { return static_cast<int>(coords_.size()); }
  int full_size() const { return family_.size(); }
  int reduced_size() const { return family_.psi_size() + static_cast<int>(free_.size()); }
  std::string name() const;
  std::vector<std::string> reduced_names() const;

  /// Full theta from reduced (psi, gamma_2).
  Eigen::VectorXd expand(const Eigen::VectorXd& reduced) const;
  /// (psi, gamma_2) extracted from a full theta.
  Eigen::VectorXd reduce(const Eigen::VectorXd& theta) const;
  /// d theta / d reduced', m x m_R.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& reduced) const;
  /// r(theta) = S gamma - g(psi).
  Eigen::VectorXd residual(const Eigen::VectorXd& theta) const;
  /// R(theta) = d r / d theta', r x m.
  Eigen::MatrixXd residual_jacobian(const Eigen::VectorXd& theta) const;

 private:
  FilterFamily family_{};
  std::vector<RestrictionKind> kinds_;
  std::vector<RestrictedCoordinate> coords_;  // sorted by gamma_index
  std::vector<int> free_;
};

ParamVector apply_restriction(const RestrictionSpec& spec, const Eigen::VectorXd& reduced);

}  // namespace pvq
