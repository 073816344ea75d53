#include "ccrtd/rolling.hpp"

#include <iomanip>
#include <ostream>

#include "ccrtd/errors.hpp"

namespace ccrtd {

RollingResult run_rolling(const SystemData& data, int windows, const AssemblyOptions& options,
                          const SolverOptions& solver_options) {
  const int t_count = data.base.periods();
  if (windows < 1) throw InvalidInputError("at least one window is required");
  if (windows + t_count - 1 > data.supplied_periods()) {
    throw InvalidInputError("rolling over " + std::to_string(windows) + " windows needs " +
                            std::to_string(windows + t_count - 1) + " forecast periods, found " +
                            std::to_string(data.supplied_periods()));
  }
  const auto& base = data.base;
  const auto units_s = static_cast<Eigen::Index>(base.non_agc.size());
  const auto units_a = static_cast<Eigen::Index>(base.agc.size());

  RollingResult result;
  result.non_agc.resize(units_s, windows);
  result.agc.resize(units_a, windows);
  result.wind.resize(static_cast<Eigen::Index>(base.wind_farms.size()), windows);
  result.wind_total.resize(windows);

  Eigen::VectorXd anchor(units_s + units_a);
  for (Eigen::Index i = 0; i < units_s; ++i) anchor[i] = base.non_agc[static_cast<std::size_t>(i)].initial_output;
  for (Eigen::Index j = 0; j < units_a; ++j) anchor[units_s + j] = base.agc[static_cast<std::size_t>(j)].initial_output;

  for (int w = 0; w < windows; ++w) {
    const DispatchProblem problem = data.window(w, &anchor);
    const DispatchResult solved = dispatch(problem, options, solver_options);
    if (solved.solution.status != SolveStatus::Optimal) {
      result.status = solved.solution.status;
      result.failed_window = w;
      break;
    }
    const auto& s = solved.schedule;
    result.non_agc.col(w) = s.non_agc.col(0);
    result.agc.col(w) = s.agc.col(0);
    result.wind.col(w) = s.wind.col(0);
    result.wind_total[w] = s.wind_total[0];
    result.objectives.push_back(s.objective());
    anchor << s.non_agc.col(0), s.agc.col(0);
  }
  const int done = result.committed();
  result.non_agc.conservativeResize(Eigen::NoChange, done);
  result.agc.conservativeResize(Eigen::NoChange, done);
  result.wind.conservativeResize(Eigen::NoChange, done);
  result.wind_total.conservativeResize(done);
  return result;
}

void write_trajectory_csv(std::ostream& out, const DispatchProblem& problem, const RollingResult& result) {
  out << "period,kind,device,mw\n" << std::setprecision(17);
  for (int t = 0; t < result.committed(); ++t) {
    for (std::size_t i = 0; i < problem.non_agc.size(); ++i) {
      out << t + 1 << ",non_agc," << problem.non_agc[i].name << ',' << result.non_agc(static_cast<Eigen::Index>(i), t)
          << "\n";
    }
    for (std::size_t j = 0; j < problem.agc.size(); ++j) {
      out << t + 1 << ",agc," << problem.agc[j].name << ',' << result.agc(static_cast<Eigen::Index>(j), t) << "\n";
    }
    for (std::size_t k = 0; k < problem.wind_farms.size(); ++k) {
      out << t + 1 << ",wind," << problem.wind_farms[k].name << ',' << result.wind(static_cast<Eigen::Index>(k), t)
          << "\n";
    }
    out << t + 1 << ",wind_total,," << result.wind_total[t] << "\n";
  }
}

}  // namespace ccrtd
