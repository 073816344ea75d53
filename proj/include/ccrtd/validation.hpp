#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ccrtd/dispatch_model.hpp"
#include "ccrtd/network.hpp"

namespace ccrtd {

/// Realized wind per period. Every scenario shares one chi variate across
/// periods while the normal parts are independent per period, so any pair of
/// periods follows the block-diagonal joint Cauchy law.
struct ScenarioSet {
  std::vector<Eigen::MatrixXd> wind;  // [t] is n x K
  std::uint64_t seed = 0;
  bool clipped = false;

  Eigen::Index size() const { return wind.empty() ? 0 : wind.front().rows(); }
  int periods() const { return static_cast<int>(wind.size()); }
  /// Realized total wind, n x T.
  Eigen::MatrixXd totals() const;
};

/// Scenario i depends only on (seed, i). With `clip`, draws are clamped to
/// [0, cap] per farm and period.
ScenarioSet generate_scenarios(const DispatchProblem& problem, Eigen::Index n, std::uint64_t seed,
                               bool clip = false);

/// p~ = p - alpha (w~ - w) for every AGC unit; `realized_total` and
/// `scheduled_total` are per-period totals. Result is units x periods.
Eigen::MatrixXd realize_agc(const Eigen::Ref<const Eigen::MatrixXd>& agc_schedule,
                            const Eigen::Ref<const Eigen::VectorXd>& scheduled_total,
                            const Eigen::Ref<const Eigen::VectorXd>& realized_total,
                            std::span<const AgcUnit> fleet);

struct ViolationRate {
  RowFamily family = RowFamily::AgcCapacity;
  std::string name;
  int period = 0;
  int element = -1;
  bool upper = true;
  double rate = 0.0;
  double standard_error = 0.0;  // binomial, at the observed rate
  double risk = 0.0;
};

struct LineSecurity {
  int line = 0;
  std::string name;
  double joint = 1.0;  // all periods within limit
  std::vector<double> per_period;
};

struct Estimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

struct SecurityReport {
  Eigen::Index samples = 0;
  std::uint64_t seed = 0;
  bool clipped = false;
  std::vector<ViolationRate> rates;
  /// Ramping index per transition t -> t+1 (t = 0 .. T-2).
  std::vector<double> ramp_index;
  double ramp_index_mean = 1.0;
  std::vector<LineSecurity> line_index;  // finite-limit lines only
  Estimate cost;

  /// Binomial standard error at risk level `risk` for this sample size.
  double tolerance(double risk) const;
  /// Rates above risk + 3 SE.
  std::vector<const ViolationRate*> failures() const;
  bool passed() const { return failures().empty(); }
};

struct ValidationOptions {
  int workers = 1;
  /// Scenarios per reduction chunk; the reduction order is fixed so results
  /// do not depend on `workers`.
  Eigen::Index chunk = 4096;
};

/// Empirical violation frequency of every chance statement, per
/// (element, period, side).
std::vector<ViolationRate> chance_violation_rates(const DispatchProblem& problem, const PtdfMatrix& ptdf,
                                                  const DispatchSchedule& schedule, const ScenarioSet& scenarios,
                                                  const ValidationOptions& options = {});

/// Per-transition fraction of scenarios in which every AGC unit's realized
/// change stays within its ramp limits. Throws InvalidInputError for T < 2.
std::vector<double> ramping_security_index(const DispatchProblem& problem, const DispatchSchedule& schedule,
                                           const ScenarioSet& scenarios);

/// Fraction of scenarios in which |flow| on `line` stays within its limit,
/// jointly over all periods and per period.
LineSecurity transmission_security_index(const DispatchProblem& problem, const PtdfMatrix& ptdf,
                                         const DispatchSchedule& schedule, const ScenarioSet& scenarios,
                                         int line);

/// Monte Carlo expected regulation cost of one period, integrating only
/// realizations inside [0, total_cap].
Estimate mc_corrective_cost(std::span<const AgcUnit> fleet, double scheduled, std::span<const double> realized,
                            double total_cap);

/// Generation cost plus Monte Carlo regulation cost over all periods.
Estimate mc_expected_cost(const DispatchProblem& problem, const DispatchSchedule& schedule,
                          const ScenarioSet& scenarios);

SecurityReport validate_schedule(const DispatchProblem& problem, const DispatchSchedule& schedule,
                                 const ScenarioSet& scenarios, const ValidationOptions& options = {});

void write_report_csv(std::ostream& out, const SecurityReport& report);
void write_report_text(std::ostream& out, const SecurityReport& report);

}  // namespace ccrtd
