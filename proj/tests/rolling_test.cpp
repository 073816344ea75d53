#include <gtest/gtest.h>

#include <sstream>

#include "ccrtd/errors.hpp"
#include "ccrtd/rolling.hpp"
#include "test_support.hpp"

namespace ccrtd {
namespace {

SystemData example() { return load_system(testing::data_file("example_6bus.json")); }

// Single bus, constant load and forecast over `supplied` periods.
SystemData constant_system(int horizon, int supplied) {
  SystemData data;
  data.base = testing::single_bus_problem(horizon, 50.0, 3.0, 150.0);
  NonAgcUnit g;
  g.name = "G1";
  g.p_max = 200.0;
  g.cost = {0.02, 6.0, 0.0};
  data.base.non_agc.push_back(g);
  data.base.agc[0].p_max = 150.0;
  data.loads = Eigen::MatrixXd::Constant(supplied, 1, 150.0);
  data.forecasts.assign(static_cast<std::size_t>(supplied), data.base.forecasts.front());
  return data;
}

TEST(RollingTest, SingleWindowMatchesDispatch) {
  const SystemData data = example();
  const RollingResult rolled = run_rolling(data, 1);
  ASSERT_EQ(rolled.committed(), 1);
  const DispatchResult direct = dispatch(data.base);
  ASSERT_EQ(direct.solution.status, SolveStatus::Optimal);
  EXPECT_LT((rolled.non_agc.col(0) - direct.schedule.non_agc.col(0)).norm(), 1e-9);
  EXPECT_LT((rolled.agc.col(0) - direct.schedule.agc.col(0)).norm(), 1e-9);
  EXPECT_NEAR(rolled.wind_total[0], direct.schedule.wind_total[0], 1e-9);
  EXPECT_NEAR(rolled.objectives[0], direct.schedule.objective(), 1e-9 * direct.schedule.objective());
}

TEST(RollingTest, CommittedOutputsRespectRampsAcrossWindows) {
  const SystemData data = example();
  const int windows = std::min(6, data.supplied_periods() - data.base.periods() + 1);
  ASSERT_GE(windows, 2);
  const RollingResult r = run_rolling(data, windows);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  ASSERT_EQ(r.committed(), windows);
  const double dt = data.base.horizon.minutes;
  const double tol = 1e-6;
  for (std::size_t i = 0; i < data.base.non_agc.size(); ++i) {
    const auto& g = data.base.non_agc[i];
    double previous = g.initial_output;
    for (int w = 0; w < windows; ++w) {
      const double p = r.non_agc(static_cast<Eigen::Index>(i), w);
      EXPECT_LE(p - previous, g.ramp_up * dt + tol) << g.name << " window " << w;
      EXPECT_LE(previous - p, g.ramp_down * dt + tol) << g.name << " window " << w;
      previous = p;
    }
  }
  // Balance holds for every committed period.
  for (int w = 0; w < windows; ++w) {
    const double supply = r.non_agc.col(w).sum() + r.agc.col(w).sum() + r.wind_total[w];
    EXPECT_NEAR(supply, data.loads.row(w).sum(), 1e-6);
  }
}

TEST(RollingTest, ConstantForecastsGiveAStationaryTrajectory) {
  const SystemData data = constant_system(3, 8);
  const RollingResult r = run_rolling(data, 6);
  ASSERT_EQ(r.committed(), 6);
  for (int w = 1; w < 6; ++w) {
    EXPECT_NEAR(r.non_agc(0, w), r.non_agc(0, 0), 1e-6);
    EXPECT_NEAR(r.agc(0, w), r.agc(0, 0), 1e-6);
    EXPECT_NEAR(r.wind_total[w], r.wind_total[0], 1e-6);
    EXPECT_NEAR(r.objectives[w], r.objectives[0], 1e-6 * r.objectives[0]);
  }
}

TEST(RollingTest, StopsAtTheFirstInfeasibleWindow) {
  SystemData data = constant_system(2, 6);
  data.loads(4, 0) = 900.0;  // beyond G1 + A1 + wind; first seen by window 3
  const RollingResult r = run_rolling(data, 5);
  EXPECT_EQ(r.status, SolveStatus::Infeasible);
  EXPECT_EQ(r.failed_window, 3);
  EXPECT_EQ(r.committed(), 3);
  EXPECT_EQ(r.agc.cols(), 3);

  std::ostringstream out;
  write_trajectory_csv(out, data.base, r);
  std::istringstream in(out.str());
  const DispatchProblem three = [&] {
    DispatchProblem p = data.base;
    p.horizon.periods = 3;
    p.loads = data.loads.topRows(3);
    p.forecasts.assign(3, data.forecasts.front());
    return p;
  }();
  const DispatchSchedule back = read_schedule_csv(in, three);
  EXPECT_EQ(back.agc, r.agc);
}

TEST(RollingTest, RejectsImpossibleWindowCounts) {
  const SystemData data = constant_system(3, 5);
  EXPECT_THROW(run_rolling(data, 0), InvalidInputError);
  EXPECT_THROW(run_rolling(data, 4), InvalidInputError);
  EXPECT_NO_THROW(run_rolling(data, 3));
}

}  // namespace
}  // namespace ccrtd
