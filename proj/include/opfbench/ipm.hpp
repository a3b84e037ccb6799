#pragma once

#include <optional>
#include <string>

#include "opfbench/nlp.hpp"

namespace opfbench {

enum class SolveStatus { optimal, infeasible_certified, iteration_limit, numerical_failure };

std::string to_string(SolveStatus status);
SolveStatus parse_solve_status(const std::string& text);

struct SolverOptions {
  double tolerance = 1e-8;
  int max_iterations = 500;
  double mu_init = 0.1;
  double kappa_mu = 0.2;
  double theta_mu = 1.5;
  double tau_min = 0.995;
  // Starting point; the problem's own initial point when empty.
  std::optional<VectorXd> warm_start;
  // Use the elastic feasibility phase for restoration and to certify
  // infeasibility when the main iteration fails.
  bool feasibility_phase = true;
  bool verbose = false;
};

struct SolveReport {
  SolveStatus status = SolveStatus::numerical_failure;
  VectorXd x;
  double objective = 0;
  double max_violation = 0;  // unscaled, over equalities, inequalities and bounds
  VectorXd eq_multipliers, ineq_multipliers;
  VectorXd lower_bound_multipliers, upper_bound_multipliers;
  int iterations = 0;
  double wall_time = 0;
  // l1 violation found by the feasibility phase when it ran, else 0.
  double infeasibility = 0;
  Index failed_row = -1;  // set on numerical failure when a row evaluated non-finite
  std::string message;
};

struct FeasibilityResult {
  double violation = 0;  // l1 norm of constraint violation at `x`
  VectorXd x;
  SolveStatus status = SolveStatus::numerical_failure;
  int iterations = 0;
};

SolveReport solve(const NlpProblem& prob, const SolverOptions& opts = {});

// Minimizes the sum of nonnegative elastic slacks added to every equality and
// inequality row while keeping the variable bounds hard.
FeasibilityResult feasibility_phase(const NlpProblem& prob, const SolverOptions& opts = {});

// Largest absolute violation of equalities, inequality ranges and bounds.
double max_violation(const NlpProblem& prob, const VectorXd& x);
double l1_violation(const NlpProblem& prob, const VectorXd& x);

}  // namespace opfbench
