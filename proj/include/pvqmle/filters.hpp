#pragma once

#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "pvqmle/family.hpp"
#include "pvqmle/series.hpp"

namespace pvq {

/// Lower floor applied to every pseudo-variance value.
inline constexpr double kPseudoVarianceFloor = 1e-8;

enum class DerivLevel { None, Grad, GradHess };

/// lambda_t, nu*_t and their derivatives with respect to the full theta.
///
/// Entries before valid_from are not part of the likelihood; for recursive
/// families index 0 holds the initial state. Column t of dlambda / dnu is the
/// gradient at time t. Per-t Hessians are stored only for families whose
/// filters are nonlinear in theta (IngarchLinear, BetaVar); for InarLinear they
/// are identically zero and the vectors stay empty.
struct FilteredPaths {
  int valid_from = 0;
  Eigen::VectorXd lambda;
  Eigen::VectorXd nu_star;
  Eigen::MatrixXd dlambda;
  Eigen::MatrixXd dnu;
  std::vector<Eigen::MatrixXd> d2lambda;
  std::vector<Eigen::MatrixXd> d2nu;
  bool clamped = false;

  int size() const { return static_cast<int>(lambda.size()); }
  bool has_curvature() const { return !d2lambda.empty(); }
};

/// Runs the mean and pseudo-variance recursions with forward-mode derivative
/// accumulation. Recursive states start at the sample mean of the series.
FilteredPaths run_filter(const FilterFamily& family, const Eigen::VectorXd& theta, const TimeSeries& series,
                         DerivLevel derivs);

/// CSV with columns t,lambda,nu_star (t is 1-based, usable terms only).
void write_paths_csv(const FilteredPaths& paths, const std::filesystem::path& path);

}  // namespace pvq
