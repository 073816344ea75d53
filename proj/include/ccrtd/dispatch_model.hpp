#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ccrtd/cauchy.hpp"
#include "ccrtd/convex_program.hpp"
#include "ccrtd/network.hpp"
#include "ccrtd/solver.hpp"

namespace ccrtd {

struct HorizonConfig {
  int periods = 1;
  double minutes = 5.0;  // length of one period
};

/// a p^2 + b p + c, in $/h.
struct CostCurve {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  double operator()(double p) const { return (a * p + b) * p + c; }
};

/// Conventional (non-AGC) unit. Ramp rates are MW/min; kUnlimited drops
/// the ramp rows.
struct Generator {
  std::string name;
  int bus = 0;
  double p_min = 0.0;
  double p_max = 0.0;
  double ramp_up = kUnlimited;
  double ramp_down = kUnlimited;
  CostCurve cost;
  double initial_output = 0.0;  // anchors the first-period ramp
};

using NonAgcUnit = Generator;

struct AgcUnit : Generator {
  double gamma_up = 0.0;    // $/MWh of upward regulation
  double gamma_down = 0.0;  // $/MWh of downward regulation
  double participation = 0.0;
};

struct WindFarm {
  std::string name;
  int bus = 0;
};

struct WindForecastPeriod {
  MultivariateCauchy dist;
  Eigen::VectorXd caps;  // per-farm scheduling cap, MW
  double total_cap = 0.0;
};

/// Allowed violation probabilities, each in (0, 0.5).
struct RiskLevels {
  double delta = 0.02;    // AGC capacity
  double beta = 0.02;     // AGC ramping
  double epsilon = 0.02;  // reserve
  double eta = 0.02;      // transmission

  void validate() const;
};

struct DispatchProblem {
  GridModel grid;
  HorizonConfig horizon;
  std::vector<NonAgcUnit> non_agc;
  std::vector<AgcUnit> agc;
  std::vector<WindFarm> wind_farms;
  Eigen::MatrixXd loads;  // periods x buses, MW withdrawn
  std::vector<WindForecastPeriod> forecasts;
  RiskLevels risk;
  Eigen::VectorXd reserve_up;    // per period; empty means zero
  Eigen::VectorXd reserve_down;  // per period; empty means zero

  int periods() const noexcept { return horizon.periods; }
  /// Converts $/h rates into $ per period.
  double hours() const noexcept { return horizon.minutes / 60.0; }

  /// Throws InvalidInputError (or InfeasibleConfigError for crossed unit
  /// limits) on any inconsistency.
  void validate() const;
};

/// Capacity-proportional participation factors.
void assign_proportional_participation(std::vector<AgcUnit>& units);

/// Law of the total wind output of one period.
UnivariateCauchy aggregate_wind(const WindForecastPeriod& forecast);

/// Expected regulation cost of scheduling total wind w in one period:
///   A + B w - (C s / 2) ln(1 + u^2) + C (w - m) atan(u),  u = (w - m) / s
/// with (m, s) the aggregate wind law. Constants are already summed over
/// the AGC fleet.
class CorrectiveCostTerm {
 public:
  CorrectiveCostTerm(const UnivariateCauchy& aggregate, double total_cap,
                     std::span<const AgcUnit> fleet);

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double c() const noexcept { return c_; }
  double location() const noexcept { return location_; }
  double scale() const noexcept { return scale_; }
  double total_cap() const noexcept { return total_cap_; }

  /// No domain check; smooth for every real w.
  ScalarDerivatives evaluate(double w) const;

 private:
  double a_ = 0.0;
  double b_ = 0.0;
  double c_ = 0.0;
  double location_;
  double scale_;
  double total_cap_;
};

/// Throws DomainError unless 0 <= w <= total_cap.
ScalarDerivatives corrective_cost(const CorrectiveCostTerm& term, double w);

/// Sum over units and periods of the quadratic cost. `outputs` is
/// units x periods; multiply by the period length in hours for dollars.
double generation_cost(std::span<const CostCurve> curves, const Eigen::Ref<const Eigen::MatrixXd>& outputs);

enum class ChanceSense { AtMost, AtLeast };

/// Pr[decision . u + random . y (<= or >=) bound] >= 1 - risk.
struct CompactChanceConstraint {
  std::vector<std::pair<int, double>> decision;
  Eigen::VectorXd random;
  double bound = 0.0;
  double risk = 0.02;
  ChanceSense sense = ChanceSense::AtMost;
  std::string name;
};

/// Deterministic equivalent as a `<=` row. Throws DomainError for a risk
/// outside (0, 0.5) and DegenerateDistributionError for a zero random part.
LinearRow convert_chance_row(const CompactChanceConstraint& constraint, const MultivariateCauchy& dist);

enum class RowFamily { Balance, WindLink, AgcCapacity, NonAgcRamp, AgcRamp, Reserve, Transmission };

std::string to_string(RowFamily family);

struct RowInfo {
  RowFamily family = RowFamily::Balance;
  int period = 0;
  int element = -1;  // unit, line or -1
  bool upper = true;
};

/// Positions of the decision variables in the program.
struct VariableIndex {
  std::vector<std::vector<int>> non_agc;  // [unit][t]
  std::vector<std::vector<int>> agc;      // [unit][t]
  std::vector<std::vector<int>> wind;     // [farm][t]
  std::vector<int> wind_total;            // [t]
};

struct AssemblyOptions {
  /// Stochastic AGC ramp rows; off gives plain base-point ramps.
  bool aprr = true;
  /// Participation terms in the line rows; off gives conventional rows.
  bool affine_lines = true;
};

struct AssembledModel {
  ConvexProgram program;
  VariableIndex index;
  std::vector<RowInfo> row_info;
  std::vector<CorrectiveCostTerm> corrective;  // per period
  int bound_count = 0;  // finite variable bounds

  int constraint_count() const noexcept { return program.row_count() + bound_count; }
};

AssembledModel assemble(const DispatchProblem& problem, const PtdfMatrix& ptdf,
                        const AssemblyOptions& options = {});

/// Human-readable listing of variables, bounds and rows.
void write_model_dump(std::ostream& out, const AssembledModel& model);

struct DispatchSchedule {
  Eigen::MatrixXd non_agc;  // units x periods
  Eigen::MatrixXd agc;      // units x periods
  Eigen::MatrixXd wind;     // farms x periods
  Eigen::VectorXd wind_total;
  double generation_cost = 0.0;  // $ over the horizon
  double corrective_cost = 0.0;  // expected, $ over the horizon

  double objective() const { return generation_cost + corrective_cost; }
};

/// Fills the cost fields of `schedule` from its outputs.
void evaluate_costs(const DispatchProblem& problem, DispatchSchedule& schedule);

DispatchSchedule extract_schedule(const DispatchProblem& problem, const AssembledModel& model,
                                  const Eigen::VectorXd& x);

struct DispatchResult {
  DispatchSchedule schedule;
  Solution solution;
  int variable_count = 0;
  int constraint_count = 0;
  /// Rows whose multiplier exceeds the binding threshold.
  std::vector<std::pair<RowInfo, std::string>> binding_rows;
};

/// Validates, assembles and solves. Infeasibility is reported through the
/// solution status rather than thrown.
DispatchResult dispatch(const DispatchProblem& problem, const AssemblyOptions& options = {},
                        const SolverOptions& solver_options = {});

}  // namespace ccrtd
