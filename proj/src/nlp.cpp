#include "opfbench/nlp.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

namespace opfbench {

VectorXd NlpProblem::initial_point() const {
  VectorXd x(num_variables());
  for (Index i = 0; i < x.size(); ++i) {
    double lo = x_lower[i], hi = x_upper[i];
    if (std::isfinite(lo) && std::isfinite(hi)) {
      x[i] = 0.5 * (lo + hi);
    } else if (std::isfinite(lo)) {
      x[i] = std::max(lo, 0.0);
    } else if (std::isfinite(hi)) {
      x[i] = std::min(hi, 0.0);
    } else {
      x[i] = 0;
    }
  }
  return x;
}

namespace {

double worst(const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& fd) {
  return ((analytic - fd).array().abs() / fd.array().abs().max(1.0)).maxCoeff();
}

Eigen::MatrixXd symmetric(const SparseMatrix& lower) {
  Eigen::MatrixXd dense = Eigen::MatrixXd(lower);
  Eigen::MatrixXd strict = dense.triangularView<Eigen::StrictlyLower>();
  return Eigen::MatrixXd(dense.triangularView<Eigen::Lower>()) + strict.transpose();
}

}  // namespace

double check_derivatives(const NlpProblem& prob, const VectorXd& x, double step, std::uint64_t seed,
                         DerivativeScaling scaling) {
  const Index n = prob.num_variables();
  const Index me = prob.num_equalities();
  const Index mi = prob.num_inequalities();

  const Eigen::MatrixXd jc = prob.equality_jacobian(x), jd = prob.inequality_jacobian(x);
  const VectorXd grad = prob.gradient(x);
  double sigma = 1.0;
  VectorXd sc = VectorXd::Ones(me), sd = VectorXd::Ones(mi);
  if (scaling == DerivativeScaling::per_function) {
    sigma = 1.0 / std::max(1.0, n > 0 ? grad.lpNorm<Eigen::Infinity>() : 0.0);
    if (me > 0) sc = 1.0 / jc.array().abs().rowwise().maxCoeff().max(1.0);
    if (mi > 0) sd = 1.0 / jd.array().abs().rowwise().maxCoeff().max(1.0);
  }

  std::mt19937_64 rng{seed};
  std::uniform_real_distribution<double> unit{-1.0, 1.0};
  VectorXd y(me), z(mi);
  for (Index i = 0; i < me; ++i) y[i] = unit(rng) * sc[i];
  for (Index i = 0; i < mi; ++i) z[i] = unit(rng) * sd[i];

  auto lagrangian_gradient = [&](const VectorXd& p) -> VectorXd {
    VectorXd g = sigma * prob.gradient(p);
    if (me > 0) g += prob.equality_jacobian(p).transpose() * y;
    if (mi > 0) g += prob.inequality_jacobian(p).transpose() * z;
    return g;
  };

  Eigen::MatrixXd fd_grad(n, 1), fd_jc(me, n), fd_jd(mi, n), fd_h(n, n);
  VectorXd xp = x, xm = x;
  for (Index i = 0; i < n; ++i) {
    xp[i] = x[i] + step;
    xm[i] = x[i] - step;
    const double inv = 1.0 / (xp[i] - xm[i]);
    fd_grad(i, 0) = (prob.objective(xp) - prob.objective(xm)) * inv;
    if (me > 0) fd_jc.col(i) = (prob.equalities(xp) - prob.equalities(xm)) * inv;
    if (mi > 0) fd_jd.col(i) = (prob.inequalities(xp) - prob.inequalities(xm)) * inv;
    fd_h.col(i) = (lagrangian_gradient(xp) - lagrangian_gradient(xm)) * inv;
    xp[i] = x[i];
    xm[i] = x[i];
  }

  double err = 0;
  if (n > 0) {
    err = std::max(err, worst(sigma * grad, sigma * fd_grad));
    err = std::max(err, worst(symmetric(prob.hessian(x, sigma, y, z)), fd_h));
  }
  if (me > 0) err = std::max(err, worst(sc.asDiagonal() * jc, sc.asDiagonal() * fd_jc));
  if (mi > 0) err = std::max(err, worst(sd.asDiagonal() * jd, sd.asDiagonal() * fd_jd));
  return err;
}

VectorXd random_interior_point(const NlpProblem& prob, std::uint64_t seed) {
  std::mt19937_64 rng{seed};
  std::uniform_real_distribution<double> unit{0.0, 1.0};
  VectorXd x(prob.num_variables());
  for (Index i = 0; i < x.size(); ++i) {
    double lo = prob.x_lower[i], hi = prob.x_upper[i];
    if (!std::isfinite(lo) && !std::isfinite(hi)) {
      lo = -1;
      hi = 1;
    } else if (!std::isfinite(lo)) {
      lo = hi - 1;
    } else if (!std::isfinite(hi)) {
      hi = lo + 1;
    }
    double u = unit(rng);
    x[i] = lo == hi ? lo : lo + (0.05 + 0.9 * u) * (hi - lo);
  }
  return x;
}

}  // namespace opfbench
