#pragma once

#include <functional>

#include <Eigen/Core>

namespace pvq {

/// Objective for minimization. Returns f(x) and, when grad is non-null,
/// writes the gradient. Returning +inf marks x as infeasible; the line search
/// then backtracks.
using DifferentiableFunction = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct BfgsOptions {
  double tol_g = 1e-6;  // sup-norm of the gradient
  int max_iter = 500;
  double c1 = 1e-4;     // sufficient decrease
  double c2 = 0.9;      // curvature (strong Wolfe)
};

struct BfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd grad;
  int iterations = 0;
  bool converged = false;
  bool line_search_failed = false;
};

/// Quasi-Newton minimization with an inverse-Hessian BFGS update and a
/// strong-Wolfe line search (bracketing + zoom with safeguarded cubic
/// interpolation).
BfgsResult minimize_bfgs(const DifferentiableFunction& fn, const Eigen::VectorXd& x0, const BfgsOptions& options = {});

}  // namespace pvq
