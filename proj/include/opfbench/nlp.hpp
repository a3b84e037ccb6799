#pragma once

#include <cstdint>
#include <limits>
#include <string>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace opfbench {

using Eigen::Index;
using Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

inline constexpr double inf = std::numeric_limits<double>::infinity();

// min f(x)  s.t.  c(x) = 0,  d_lower <= d(x) <= d_upper,  x_lower <= x <= x_upper
//
// Jacobians and the Hessian are returned with a sparsity pattern that depends
// only on the problem structure (explicit zeros are kept), never on x. The
// Hessian is the lower triangle of
//   sigma * hess f + sum_i y_i hess c_i + sum_j z_j hess d_j.
class NlpProblem {
 public:
  virtual ~NlpProblem() = default;

  Index num_variables() const { return x_lower.size(); }
  Index num_equalities() const { return num_eq; }
  Index num_inequalities() const { return d_lower.size(); }

  virtual double objective(const VectorXd& x) const = 0;
  virtual VectorXd gradient(const VectorXd& x) const = 0;
  virtual VectorXd equalities(const VectorXd& x) const = 0;
  virtual VectorXd inequalities(const VectorXd& x) const = 0;
  virtual SparseMatrix equality_jacobian(const VectorXd& x) const = 0;
  virtual SparseMatrix inequality_jacobian(const VectorXd& x) const = 0;
  virtual SparseMatrix hessian(const VectorXd& x, double sigma, const VectorXd& y,
                               const VectorXd& z) const = 0;

  virtual VectorXd initial_point() const;
  virtual std::string variable_name(Index i) const { return "x" + std::to_string(i); }
  virtual std::string equality_name(Index i) const { return "c" + std::to_string(i); }
  virtual std::string inequality_name(Index i) const { return "d" + std::to_string(i); }

  VectorXd x_lower, x_upper;
  VectorXd d_lower, d_upper;
  Index num_eq = 0;
};

// With per_function, the objective and every constraint row are divided by
// max(1, largest gradient entry at x) before comparing, so rows whose terms
// reach 1e6 are not judged by their finite difference roundoff.
enum class DerivativeScaling { none, per_function };

// Worst relative error |analytic - fd| / max(1, |fd|) of the gradient, both
// Jacobians and the Hessian against central differences, with pseudo-random
// multipliers derived from `seed`.
double check_derivatives(const NlpProblem& prob, const VectorXd& x, double step = 1e-6,
                         std::uint64_t seed = 7, DerivativeScaling scaling = DerivativeScaling::per_function);

// Uniform random point strictly inside the finite bounds. Infinite sides are
// replaced by a unit margin around the finite one.
VectorXd random_interior_point(const NlpProblem& prob, std::uint64_t seed);

}  // namespace opfbench
