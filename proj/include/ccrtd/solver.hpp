#pragma once

#include <Eigen/Core>

#include <ostream>
#include <string>
#include <vector>

#include "ccrtd/convex_program.hpp"

namespace ccrtd {

struct SolverOptions {
  double kkt_tolerance = 1e-6;
  /// Cap on Newton steps per phase.
  int max_iterations = 500;
  double barrier_reduction = 0.2;
  double initial_barrier = 1.0;
  double backtracking = 0.5;
  /// Streams one line per Newton step to `log` when set.
  bool verbose = false;
  std::ostream* log = nullptr;
};

enum class SolveStatus { Optimal, Infeasible, IterationLimit };

std::string to_string(SolveStatus status);

struct KktResiduals {
  double stationarity = 0.0;
  double primal_feasibility = 0.0;
  double complementarity = 0.0;

  double max() const;
};

/// Lagrange multipliers in program order. Row multipliers of `<=` rows are
/// nonnegative; equality rows are free. Bound multipliers are nonnegative.
struct Multipliers {
  Eigen::VectorXd rows;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct Solution {
  Eigen::VectorXd x;
  double objective = 0.0;
  SolveStatus status = SolveStatus::IterationLimit;
  Multipliers multipliers;
  KktResiduals residuals;
  int iterations = 0;
  /// Infeasibility certificate: rows (or bounds) carrying weight at the
  /// phase-1 optimum.
  std::vector<std::string> violated_rows;
  /// Objective value at the end of each outer barrier iteration.
  std::vector<double> outer_objectives;
};

/// Primal log-barrier interior-point method with a phase-1 feasibility
/// search. Throws ConvexityViolationError when the objective Hessian shows
/// negative curvature beyond 1e-8.
Solution solve(const ConvexProgram& program, const SolverOptions& options = {});

/// Residuals of the first-order conditions:
///   stationarity  ||grad f + sum_r m_r a_r - lower + upper||_inf
///   primal        max violation of rows and bounds
///   complementarity max |m * slack| over inequality rows and bounds.
KktResiduals kkt_residuals(const ConvexProgram& program, const Eigen::VectorXd& x,
                           const Multipliers& multipliers);

}  // namespace ccrtd
