#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "ccrtd/errors.hpp"
#include "ccrtd/validation.hpp"
#include "ccrtd/system_io.hpp"
#include "test_support.hpp"

namespace ccrtd {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using testing::single_bus_problem;

DispatchSchedule flat_schedule(const DispatchProblem& p, double agc, double wind) {
  DispatchSchedule s;
  const int T = p.periods();
  s.non_agc = MatrixXd::Zero(static_cast<Eigen::Index>(p.non_agc.size()), T);
  s.agc = MatrixXd::Constant(static_cast<Eigen::Index>(p.agc.size()), T, agc);
  s.wind = MatrixXd::Constant(static_cast<Eigen::Index>(p.wind_farms.size()), T, wind);
  s.wind_total = VectorXd::Constant(T, wind);
  evaluate_costs(p, s);
  return s;
}

ScenarioSet manual_set(const std::vector<std::vector<double>>& per_period) {
  ScenarioSet set;
  for (const auto& column : per_period) {
    MatrixXd w(static_cast<Eigen::Index>(column.size()), 1);
    for (std::size_t i = 0; i < column.size(); ++i) w(static_cast<Eigen::Index>(i), 0) = column[i];
    set.wind.push_back(w);
  }
  return set;
}

const ViolationRate& rate_named(const std::vector<ViolationRate>& rates, const std::string& name) {
  for (const auto& r : rates) {
    if (r.name == name) return r;
  }
  throw std::runtime_error("no rate " + name);
}

TEST(RealizeAgcTest, SharesDeviationByParticipation) {
  std::vector<AgcUnit> fleet(2);
  fleet[0].participation = 0.25;
  fleet[1].participation = 0.75;
  MatrixXd sched(2, 2);
  sched << 100, 110, 200, 190;
  const VectorXd scheduled = (VectorXd(2) << 50, 60).finished();
  const VectorXd realized = (VectorXd(2) << 58, 40).finished();
  const MatrixXd out = realize_agc(sched, scheduled, realized, fleet);
  EXPECT_DOUBLE_EQ(out(0, 0), 98.0);
  EXPECT_DOUBLE_EQ(out(1, 0), 194.0);
  EXPECT_DOUBLE_EQ(out(0, 1), 115.0);
  EXPECT_DOUBLE_EQ(out(1, 1), 205.0);
  EXPECT_THROW(realize_agc(sched, scheduled, VectorXd::Zero(3), fleet), InvalidInputError);
}

TEST(RampIndexTest, HandEnumeratedSingleUnit) {
  DispatchProblem p = single_bus_problem(2, 50.0, 5.0, 150.0);
  p.agc[0].ramp_up = 1.0;
  p.agc[0].ramp_down = 1.0;  // 5 MW per period
  const DispatchSchedule s = flat_schedule(p, 100.0, 50.0);
  // Realized change of A1 is w1 - w2; violated when it leaves [-5, 5].
  const std::vector<double> w1{50, 52, 49, 60, 51, 40, 50, 53, 48, 70};
  const std::vector<double> w2{50, 50, 53, 50, 55, 40, 46, 57, 52, 50};
  //                  change:   0   2  -4  10  -4   0   4  -4  -4  20  -> 2 up
  std::vector<double> w2b = w2;
  w2b[4] = 57;  // change -6 -> one down violation
  const ScenarioSet set = manual_set({w1, w2b});
  const auto index = ramping_security_index(p, s, set);
  ASSERT_EQ(index.size(), 1u);
  EXPECT_DOUBLE_EQ(index[0], 0.7);

  const auto rates = chance_violation_rates(p, build_ptdf(p.grid), s, set);
  EXPECT_DOUBLE_EQ(rate_named(rates, "agc_ramp_up[A1,t2]").rate, 0.2);
  EXPECT_DOUBLE_EQ(rate_named(rates, "agc_ramp_down[A1,t2]").rate, 0.1);
}

TEST(LineIndexTest, HandEnumeratedTriangle) {
  DispatchProblem p;
  p.grid.bus_count = 3;
  p.grid.slack_bus = 2;
  p.grid.lines = {{0, 1, 0.1, kUnlimited, "L12"}, {1, 2, 0.1, kUnlimited, "L23"}, {0, 2, 0.1, 60.0, "L13"}};
  p.horizon = {1, 5.0};
  AgcUnit a;
  a.name = "A1";
  a.bus = 2;
  a.p_max = 500.0;
  a.participation = 1.0;
  p.agc.push_back(a);
  p.wind_farms.push_back({"W1", 0});
  p.loads = MatrixXd::Zero(1, 3);
  p.loads(0, 2) = 150.0;
  p.forecasts.push_back({MultivariateCauchy(VectorXd::Constant(1, 50.0), MatrixXd::Constant(1, 1, 25.0)),
                         VectorXd::Constant(1, 200.0), 200.0});
  const DispatchSchedule s = flat_schedule(p, 100.0, 50.0);
  // Wind at bus 1 reaches the slack bus two thirds through L13; AGC sits at
  // the slack, so flow = 2/3 w~ and the limit is crossed above 90 MW.
  const ScenarioSet set = manual_set({{10, 50, 89, 91, 120, 0, 60, 80, 30, 75}});
  const PtdfMatrix ptdf = build_ptdf(p.grid);
  const LineSecurity l13 = transmission_security_index(p, ptdf, s, set, 2);
  EXPECT_DOUBLE_EQ(l13.joint, 0.8);
  ASSERT_EQ(l13.per_period.size(), 1u);
  EXPECT_DOUBLE_EQ(l13.per_period[0], 0.8);
  EXPECT_DOUBLE_EQ(transmission_security_index(p, ptdf, s, set, 0).joint, 1.0);
  EXPECT_THROW(transmission_security_index(p, ptdf, s, set, 3), InvalidInputError);

  const auto rates = chance_violation_rates(p, ptdf, s, set);
  EXPECT_DOUBLE_EQ(rate_named(rates, "line_max[L13,t1]").rate, 0.2);
  EXPECT_DOUBLE_EQ(rate_named(rates, "line_min[L13,t1]").rate, 0.0);
}

TEST(ValidationTest, VanishingScaleNeverViolates) {
  DispatchProblem p = single_bus_problem(3, 50.0, 5.0, 150.0);
  p.agc[0].ramp_up = 1.0;
  p.agc[0].ramp_down = 1.0;
  p = testing::with_wind_scale(p, 1e-24);
  const DispatchSchedule s = flat_schedule(p, 100.0, 50.0);
  const ScenarioSet set = generate_scenarios(p, 5000, 3);
  const SecurityReport report = validate_schedule(p, s, set);
  for (const auto& r : report.rates) EXPECT_EQ(r.rate, 0.0) << r.name;
  for (double v : report.ramp_index) EXPECT_EQ(v, 1.0);
  EXPECT_TRUE(report.passed());
}

TEST(ValidationTest, WorkerCountDoesNotChangeResults) {
  const DispatchProblem p = load_system(testing::data_file("example_6bus.json")).base;
  const DispatchResult result = dispatch(p);
  ASSERT_EQ(result.solution.status, SolveStatus::Optimal);
  const ScenarioSet set = generate_scenarios(p, 20000, 11);
  const PtdfMatrix ptdf = build_ptdf(p.grid);
  const auto serial = chance_violation_rates(p, ptdf, result.schedule, set, {1, 1000});
  const auto parallel = chance_violation_rates(p, ptdf, result.schedule, set, {4, 1000});
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].name, parallel[i].name);
    EXPECT_EQ(serial[i].rate, parallel[i].rate);
  }
  const ScenarioSet again = generate_scenarios(p, 20000, 11);
  for (int t = 0; t < set.periods(); ++t) EXPECT_EQ(set.wind[t], again.wind[t]);
}

TEST(ValidationTest, ClippingNeverRaisesCapacityOrReserveRates) {
  DispatchProblem p = single_bus_problem(2, 50.0, 8.0, 150.0);
  p.agc[0].p_min = 80.0;
  p.agc[0].p_max = 120.0;
  const DispatchSchedule s = flat_schedule(p, 100.0, 50.0);
  const PtdfMatrix ptdf = build_ptdf(p.grid);
  const auto raw = chance_violation_rates(p, ptdf, s, generate_scenarios(p, 50000, 5, false));
  const auto clipped = chance_violation_rates(p, ptdf, s, generate_scenarios(p, 50000, 5, true));
  ASSERT_EQ(raw.size(), clipped.size());
  int checked = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].family != RowFamily::AgcCapacity && raw[i].family != RowFamily::Reserve) continue;
    EXPECT_LE(clipped[i].rate, raw[i].rate) << raw[i].name;
    ++checked;
  }
  EXPECT_EQ(checked, 8);
  // A 20 MW margin against sigma 8 is crossed often under heavy tails.
  EXPECT_GT(raw[0].rate, 0.0);
}

TEST(ValidationTest, TightCapacityRowViolatesAtItsRisk) {
  DispatchProblem p = single_bus_problem(1, 50.0, 4.0, 150.0);
  p.risk.delta = 0.05;
  // Upper capacity binds exactly: A1 exceeds p_max when w~ < m + s tan(pi (delta - 1/2)).
  const double pa = 1000.0 + 4.0 * std::tan(std::numbers::pi * (0.05 - 0.5));
  const DispatchSchedule s = flat_schedule(p, pa, 50.0);
  const Eigen::Index n = 100000;
  const auto rates = chance_violation_rates(p, build_ptdf(p.grid), s, generate_scenarios(p, n, 21));
  const auto& up = rate_named(rates, "agc_capacity_up[A1,t1]");
  EXPECT_NEAR(up.rate, 0.05, 3.0 * testing::binomial_se(0.05, n));
  EXPECT_NEAR(up.standard_error, std::sqrt(up.rate * (1 - up.rate) / n), 1e-15);
}

TEST(ValidationTest, StandardErrorShrinksWithSamples) {
  DispatchProblem p = single_bus_problem(1, 50.0, 4.0, 150.0);
  const double pa = 1000.0 + 4.0 * std::tan(std::numbers::pi * (0.1 - 0.5));
  const DispatchSchedule s = flat_schedule(p, pa, 50.0);
  const PtdfMatrix ptdf = build_ptdf(p.grid);
  const auto small = rate_named(chance_violation_rates(p, ptdf, s, generate_scenarios(p, 10000, 2)),
                                "agc_capacity_up[A1,t1]");
  const auto large = rate_named(chance_violation_rates(p, ptdf, s, generate_scenarios(p, 160000, 2)),
                                "agc_capacity_up[A1,t1]");
  EXPECT_NEAR(small.standard_error / large.standard_error, 4.0, 0.4);
}

TEST(McCostTest, MatchesClosedForm) {
  std::vector<AgcUnit> fleet(2);
  fleet[0].participation = 0.4;
  fleet[0].gamma_up = 10.0;
  fleet[0].gamma_down = 30.0;
  fleet[1].participation = 0.6;
  fleet[1].gamma_up = 20.0;
  fleet[1].gamma_down = 15.0;
  const double m = 120.0, sigma = 9.0, cap = 300.0;
  const CorrectiveCostTerm term(UnivariateCauchy(m, sigma), cap, fleet);
  std::mt19937_64 rng(99);
  std::cauchy_distribution<double> law(m, sigma);
  std::vector<double> draws(1000000);
  for (auto& d : draws) d = law(rng);
  for (double w : {60.0, 110.0, 120.0, 135.0, 250.0}) {
    const Estimate est = mc_corrective_cost(fleet, w, draws, cap);
    EXPECT_NEAR(corrective_cost(term, w).value, est.mean, 4.0 * est.standard_error) << "w = " << w;
  }
  EXPECT_THROW(mc_corrective_cost(fleet, 10.0, std::vector<double>{}, cap), InvalidInputError);
}

TEST(McCostTest, FreeRegulationLeavesGenerationCost) {
  DispatchProblem p = single_bus_problem(2, 50.0, 5.0, 150.0);
  p.agc[0].gamma_up = 0.0;
  p.agc[0].gamma_down = 0.0;
  const DispatchSchedule s = flat_schedule(p, 100.0, 50.0);
  const Estimate e = mc_expected_cost(p, s, generate_scenarios(p, 1000, 4));
  EXPECT_DOUBLE_EQ(e.mean, s.generation_cost);
  EXPECT_EQ(e.standard_error, 0.0);
}

TEST(ValidationTest, SinglePeriodHasNoRampIndex) {
  const DispatchProblem p = single_bus_problem(1, 50.0, 5.0, 150.0);
  const DispatchSchedule s = flat_schedule(p, 100.0, 50.0);
  const ScenarioSet set = generate_scenarios(p, 10, 1);
  EXPECT_THROW(ramping_security_index(p, s, set), InvalidInputError);
  EXPECT_NO_THROW(validate_schedule(p, s, set));
  EXPECT_THROW(generate_scenarios(p, 0, 1), InvalidInputError);
  EXPECT_THROW(validate_schedule(single_bus_problem(2, 50.0, 5.0, 150.0), s, set), InvalidInputError);
}

TEST(ValidationTest, RealizedDispatchStaysBalanced) {
  const DispatchProblem p = load_system(testing::data_file("example_6bus.json")).base;
  const DispatchResult result = dispatch(p);
  ASSERT_EQ(result.solution.status, SolveStatus::Optimal);
  const auto& s = result.schedule;
  const ScenarioSet set = generate_scenarios(p, 200, 8);
  const MatrixXd totals = set.totals();
  for (Eigen::Index i = 0; i < set.size(); ++i) {
    const MatrixXd agc = realize_agc(s.agc, s.wind_total, totals.row(i).transpose(), p.agc);
    for (int t = 0; t < p.periods(); ++t) {
      const double supply = s.non_agc.col(t).sum() + agc.col(t).sum() + totals(i, t);
      EXPECT_NEAR(supply, p.loads.row(t).sum(), 1e-6 * (1.0 + std::abs(totals(i, t))));
    }
  }
}

TEST(ReportTest, CsvListsEveryStatement) {
  DispatchProblem p = single_bus_problem(2, 50.0, 5.0, 150.0);
  p.agc[0].ramp_up = 2.0;
  const DispatchSchedule s = flat_schedule(p, 100.0, 50.0);
  const SecurityReport report = validate_schedule(p, s, generate_scenarios(p, 500, 6));
  std::ostringstream out;
  write_report_csv(out, report);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# samples=500 seed=6 mode=unclipped");
  std::getline(in, line);
  EXPECT_EQ(line, "kind,name,family,period,rate,standard_error,risk,within");
  int rates = 0, others = 0;
  while (std::getline(in, line)) (line.rfind("rate,", 0) == 0 ? rates : others)++;
  EXPECT_EQ(rates, static_cast<int>(report.rates.size()));
  EXPECT_EQ(rates, 2 * 2 + 1 + 2 * 2);  // capacity, ramp up at t2, reserve
  EXPECT_EQ(others, 1 + 1 + 1);         // one transition, mean, cost
  std::ostringstream text;
  write_report_text(text, report);
  EXPECT_NE(text.str().find("ramping index mean"), std::string::npos);
}

}  // namespace
}  // namespace ccrtd
