#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <vector>

#include "ccrtd/dispatch_model.hpp"
#include "ccrtd/solver.hpp"
#include "ccrtd/system_io.hpp"

namespace ccrtd {

/// First-period decisions of each window, one column per window.
struct RollingResult {
  Eigen::MatrixXd non_agc;
  Eigen::MatrixXd agc;
  Eigen::MatrixXd wind;
  Eigen::VectorXd wind_total;
  std::vector<double> objectives;  // full-window objective of each solve
  SolveStatus status = SolveStatus::Optimal;
  int failed_window = -1;  // first non-optimal window, or -1

  int committed() const { return static_cast<int>(objectives.size()); }
};

/// Slides the horizon one period at a time. The committed outputs of each
/// window become the ramp anchors of the next. Stops at the first window
/// that does not solve to optimality.
RollingResult run_rolling(const SystemData& data, int windows, const AssemblyOptions& options = {},
                          const SolverOptions& solver_options = {});

/// period,kind,device,mw rows for the committed trajectory.
void write_trajectory_csv(std::ostream& out, const DispatchProblem& problem, const RollingResult& result);

}  // namespace ccrtd
