#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "pvqmle/series.hpp"

namespace pvq {

enum class FamilyKind { InarLinear, IngarchLinear, BetaVar };

/// Mean / pseudo-variance filter family and its parameter layout.
///
/// theta = (psi, gamma) with
///   InarLinear(p):  psi = (omega1, a_1..a_p),   gamma = (omega2, b_1..b_p)
///   IngarchLinear:  psi = (omega1, alpha1, beta1), gamma = (omega2, alpha2, beta2)
///   BetaVar:        psi = (omega1, alpha1, beta1), gamma = (omega2, alpha2, beta2, phi)
struct FilterFamily {
  FamilyKind kind = FamilyKind::InarLinear;
  int lags = 1;

  static FilterFamily inar(int lags = 1);
  static FilterFamily ingarch();
  static FilterFamily beta();

  /// "inar", "inar2", ..., "ingarch", "beta".
  static FilterFamily parse(std::string_view name);
  std::string name() const;

  int psi_size() const;
  int gamma_size() const;
  int size() const { return psi_size() + gamma_size(); }

  /// 0-based index of the first term entering the quasi-likelihood.
  int first_usable() const;

  std::vector<std::string> coordinate_names() const;
  /// Position of a named coordinate in theta; throws if absent.
  int index_of(std::string_view coordinate) const;

  friend bool operator==(const FilterFamily&, const FilterFamily&) = default;
};

/// theta = (psi', gamma')' with names for reporting.
struct ParamVector {
  Eigen::VectorXd psi;
  Eigen::VectorXd gamma;
  std::vector<std::string> names;

  static ParamVector from_theta(const FilterFamily& family, const Eigen::VectorXd& theta);
  Eigen::VectorXd theta() const;
  int size() const { return static_cast<int>(psi.size() + gamma.size()); }
  double operator[](std::string_view coordinate) const;
};

/// Throws Error when theta is outside the family's admissible set.
void validate_params(const FilterFamily& family, const Eigen::VectorXd& theta);
bool is_admissible(const FilterFamily& family, const Eigen::VectorXd& theta);

}  // namespace pvq
