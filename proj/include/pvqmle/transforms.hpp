#pragma once

#include <limits>
#include <vector>

#include <Eigen/Core>

#include "pvqmle/family.hpp"
#include "pvqmle/restriction.hpp"

namespace pvq {

/// Smooth bijection between an open interval (lower, upper) and the real line:
/// lower + exp(u) when upper is infinite, otherwise a scaled logistic.
struct CoordinateTransform {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();

  bool bounded() const { return upper < std::numeric_limits<double>::infinity(); }
  double to_external(double u) const;
  double to_internal(double x) const;
  /// dx/du at u.
  double derivative(double u) const;
  /// Pulls x strictly inside the interval (relative margin).
  double clamp_inside(double x) const;
};

/// Per-coordinate transforms for a family's full theta:
///   INAR:   omega in (1e-6, inf), a_h in (0, 0.999), b_h in (0, inf)
///   INGARCH: omega in (1e-6, inf), alpha/beta in (0, 1)
///   Beta:    omega/alpha/beta in (0, 1), phi in (1e-6, inf)
std::vector<CoordinateTransform> family_transforms(const FilterFamily& family);

/// Transforms of the reduced coordinates (psi, gamma_2).
std::vector<CoordinateTransform> reduced_transforms(const RestrictionSpec& spec);

/// Sum constraints the transforms cannot express (omega+alpha+beta < 1 for
/// the recursive families). Used to reject line-search trials.
bool satisfies_sum_constraints(const FilterFamily& family, const Eigen::VectorXd& theta);

Eigen::VectorXd to_external(const std::vector<CoordinateTransform>& tr, const Eigen::VectorXd& u);
Eigen::VectorXd to_internal(const std::vector<CoordinateTransform>& tr, const Eigen::VectorXd& x);
Eigen::VectorXd transform_derivatives(const std::vector<CoordinateTransform>& tr, const Eigen::VectorXd& u);

}  // namespace pvq
