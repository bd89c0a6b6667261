#include "pvqmle/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pvq {

namespace {

struct Trial {
  double alpha = 0.0;
  double f = 0.0;
  double slope = 0.0;  // directional derivative
  Eigen::VectorXd x;
  Eigen::VectorXd g;
  bool feasible() const { return std::isfinite(f); }
};

class LineSearch {
 public:
  LineSearch(const DifferentiableFunction& fn, const Eigen::VectorXd& x, const Eigen::VectorXd& d, double f0,
             double slope0, const BfgsOptions& opt)
      : fn_(fn), x_(x), d_(d), f0_(f0), slope0_(slope0), opt_(opt) {}

  // Returns true when a point with sufficient decrease was found; `best`
  // then satisfies at least the Armijo condition.
  bool run(double alpha1, Trial& best) {
    Trial prev{0.0, f0_, slope0_, x_, {}};
    double alpha = alpha1;
    for (int i = 0; i < 40; ++i) {
      Trial cur = eval(alpha);
      if (!cur.feasible()) {
        alpha = prev.alpha + 0.5 * (alpha - prev.alpha);
        if (alpha - prev.alpha < 1e-16) break;
        continue;
      }
      if (cur.f > f0_ + opt_.c1 * cur.alpha * slope0_ || (i > 0 && cur.f >= prev.f))
        return zoom(prev, cur, best);
      if (std::abs(cur.slope) <= -opt_.c2 * slope0_) {
        best = std::move(cur);
        return true;
      }
      if (cur.slope >= 0.0) return zoom(cur, prev, best);
      prev = std::move(cur);
      alpha = std::min(2.0 * alpha, 1e8);
    }
    if (prev.alpha > 0.0 && prev.f < f0_) {
      best = std::move(prev);
      return true;
    }
    return false;
  }

 private:
  Trial eval(double alpha) {
    Trial t;
    t.alpha = alpha;
    t.x = x_ + alpha * d_;
    t.g.resize(x_.size());
    t.f = fn_(t.x, &t.g);
    if (!std::isfinite(t.f) || !t.g.allFinite()) {
      t.f = std::numeric_limits<double>::infinity();
      return t;
    }
    t.slope = t.g.dot(d_);
    return t;
  }

  static double cubic_min(const Trial& a, const Trial& b) {
    const double d1 = a.slope + b.slope - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
    const double disc = d1 * d1 - a.slope * b.slope;
    if (disc < 0.0) return std::numeric_limits<double>::quiet_NaN();
    const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
    return b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / (b.slope - a.slope + 2.0 * d2);
  }

  bool zoom(Trial lo, Trial hi, Trial& best) {
    for (int j = 0; j < 40; ++j) {
      const double left = std::min(lo.alpha, hi.alpha), right = std::max(lo.alpha, hi.alpha);
      const double width = right - left;
      if (width < 1e-14 * std::max(1.0, right)) break;
      double alpha = hi.feasible() ? cubic_min(lo, hi) : std::numeric_limits<double>::quiet_NaN();
      if (!std::isfinite(alpha) || alpha < left + 0.1 * width || alpha > right - 0.1 * width)
        alpha = 0.5 * (lo.alpha + hi.alpha);
      Trial cur = eval(alpha);
      if (!cur.feasible() || cur.f > f0_ + opt_.c1 * alpha * slope0_ || cur.f >= lo.f) {
        hi = std::move(cur);
        continue;
      }
      if (std::abs(cur.slope) <= -opt_.c2 * slope0_) {
        best = std::move(cur);
        return true;
      }
      if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
      lo = std::move(cur);
    }
    if (lo.alpha > 0.0 && lo.f < f0_) {
      best = std::move(lo);
      return true;
    }
    return false;
  }

  const DifferentiableFunction& fn_;
  const Eigen::VectorXd& x_;
  const Eigen::VectorXd& d_;
  double f0_;
  double slope0_;
  const BfgsOptions& opt_;
};

}  // namespace

BfgsResult minimize_bfgs(const DifferentiableFunction& fn, const Eigen::VectorXd& x0, const BfgsOptions& options) {
  const auto n = x0.size();
  BfgsResult res;
  res.x = x0;
  res.grad.resize(n);
  res.f = fn(res.x, &res.grad);
  if (!std::isfinite(res.f) || !res.grad.allFinite()) {
    res.line_search_failed = true;
    return res;
  }

  Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(n, n);
  bool fresh = true;  // Hinv is an (unscaled) identity
  bool retried = false;

  while (res.iterations < options.max_iter) {
    if (res.grad.lpNorm<Eigen::Infinity>() <= options.tol_g) {
      res.converged = true;
      return res;
    }
    Eigen::VectorXd d = -Hinv * res.grad;
    double slope = d.dot(res.grad);
    if (!(slope < 0.0)) {
      Hinv.setIdentity();
      fresh = true;
      d = -res.grad;
      slope = d.dot(res.grad);
    }
    const double alpha1 = fresh ? std::min(1.0, 1.0 / std::max(1e-12, d.lpNorm<Eigen::Infinity>())) : 1.0;

    Trial next;
    LineSearch search(fn, res.x, d, res.f, slope, options);
    if (!search.run(alpha1, next)) {
      if (fresh || retried) {
        res.line_search_failed = true;
        return res;
      }
      Hinv.setIdentity();
      fresh = true;
      retried = true;
      continue;
    }
    retried = false;
    ++res.iterations;

    const Eigen::VectorXd s = next.x - res.x;
    const Eigen::VectorXd yv = next.g - res.grad;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      if (fresh) Hinv *= sy / yv.squaredNorm();
      const double rho = 1.0 / sy;
      const Eigen::VectorXd Hy = Hinv * yv;
      // Sherman-Morrison form of (I - rho s y') H (I - rho y s') + rho s s'.
      Hinv.noalias() += (rho * rho * yv.dot(Hy) + rho) * s * s.transpose();
      Hinv.noalias() -= rho * (Hy * s.transpose() + s * Hy.transpose());
      fresh = false;
    }
    res.x = std::move(next.x);
    res.f = next.f;
    res.grad = std::move(next.g);
  }
  res.converged = res.grad.lpNorm<Eigen::Infinity>() <= options.tol_g;
  return res;
}

}  // namespace pvq
