#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ccrtd/cauchy.hpp"
#include "ccrtd/dispatch_model.hpp"
#include "ccrtd/network.hpp"

namespace ccrtd {

/// Parsed system file. Loads, forecasts and reserves may cover more periods
/// than the horizon; a dispatch problem is a window of them.
struct SystemData {
  DispatchProblem base;  // first window
  Eigen::MatrixXd loads;  // all supplied periods x buses
  std::vector<WindForecastPeriod> forecasts;
  Eigen::VectorXd reserve_up;
  Eigen::VectorXd reserve_down;

  int supplied_periods() const { return static_cast<int>(forecasts.size()); }

  /// Problem for periods [start, start + T). Unit initial outputs are taken
  /// from `initial` when given (non-AGC then AGC order).
  DispatchProblem window(int start, const Eigen::VectorXd* initial = nullptr) const;
};

/// Parses and fully validates a system document. Schema problems raise
/// SchemaError naming the JSON path; model inconsistencies raise the
/// dispatch_model errors.
SystemData parse_system(const std::string& json_text);
SystemData load_system(const std::filesystem::path& path);

/// One row per (period, device): period,kind,device,mw. Values are written
/// with enough digits to round-trip exactly.
void write_schedule_csv(std::ostream& out, const DispatchProblem& problem, const DispatchSchedule& schedule);

/// Reads a schedule written by write_schedule_csv and recomputes its costs.
DispatchSchedule read_schedule_csv(std::istream& in, const DispatchProblem& problem,
                                   const std::string& source = "schedule");

/// Numeric CSV (one sample per row). Blank lines and lines starting with '#'
/// are skipped and a non-numeric first line is treated as a header.
Eigen::MatrixXd read_matrix_csv(std::istream& in, const std::string& source = "csv");

/// Forecast block {"mu", "sigma", ...} for a fitted distribution.
std::string forecast_json(const FitResult& fit);

void write_ptdf_csv(std::ostream& out, const PtdfMatrix& ptdf, const GridModel& grid);

}  // namespace ccrtd
