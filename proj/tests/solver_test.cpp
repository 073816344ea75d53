#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>
#include <numeric>
#include <random>

#include "ccrtd/convex_program.hpp"
#include "ccrtd/errors.hpp"
#include "ccrtd/solver.hpp"

namespace ccrtd {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

ConvexProgram make_program(int n, MatrixXd q, VectorXd c) {
  ConvexProgram p;
  for (int i = 0; i < n; ++i) p.add_variable("x" + std::to_string(i), -kInf, kInf);
  p.set_objective(std::make_shared<QuadraticObjective>(std::move(q), std::move(c)));
  return p;
}

TEST(SolverTest, ScalarActiveUpperRow) {
  // min (x-3)^2 = x^2 - 6x + 9 s.t. x <= 2
  MatrixXd q(1, 1);
  q << 2.0;
  VectorXd c(1);
  c << -6.0;
  ConvexProgram p;
  p.add_variable("x", -kInf, kInf);
  p.set_objective(std::make_shared<QuadraticObjective>(q, c, 9.0));
  p.add_row({{{0, 1.0}}, 2.0, RowSense::LessEqual, "cap"});

  const auto sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  EXPECT_NEAR(sol.x[0], 2.0, 1e-6);
  EXPECT_NEAR(sol.objective, 1.0, 1e-6);
  EXPECT_NEAR(sol.multipliers.rows[0], 2.0, 1e-5);
  EXPECT_LE(sol.residuals.max(), 1e-6);
}

TEST(SolverTest, EqualityOnlySymmetricProblem) {
  auto p = make_program(2, 2.0 * MatrixXd::Identity(2, 2), VectorXd::Zero(2));
  p.add_row({{{0, 1.0}, {1, 1.0}}, 2.0, RowSense::Equal, "sum"});
  const auto sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  EXPECT_NEAR(sol.x[0], 1.0, 1e-8);
  EXPECT_NEAR(sol.x[1], 1.0, 1e-8);
  EXPECT_NEAR(sol.objective, 2.0, 1e-8);
  EXPECT_NEAR(sol.multipliers.rows[0], -2.0, 1e-6);
}

TEST(SolverTest, ContradictoryRowsAreReportedInfeasible) {
  auto p = make_program(1, MatrixXd::Identity(1, 1), VectorXd::Zero(1));
  p.add_row({{{0, 1.0}}, 0.0, RowSense::LessEqual, "x_le_0"});
  p.add_row({{{0, -1.0}}, -1.0, RowSense::LessEqual, "x_ge_1"});
  const auto sol = solve(p);
  EXPECT_EQ(sol.status, SolveStatus::Infeasible);
  ASSERT_EQ(sol.violated_rows.size(), 2u);
  EXPECT_NE(std::find(sol.violated_rows.begin(), sol.violated_rows.end(), "x_le_0"),
            sol.violated_rows.end());
  EXPECT_NE(std::find(sol.violated_rows.begin(), sol.violated_rows.end(), "x_ge_1"),
            sol.violated_rows.end());
}

TEST(SolverTest, InconsistentEqualitiesAreReportedInfeasible) {
  auto p = make_program(1, MatrixXd::Identity(1, 1), VectorXd::Zero(1));
  p.add_row({{{0, 1.0}}, 0.0, RowSense::Equal, "a"});
  p.add_row({{{0, 1.0}}, 1.0, RowSense::Equal, "b"});
  const auto sol = solve(p);
  EXPECT_EQ(sol.status, SolveStatus::Infeasible);
  EXPECT_FALSE(sol.violated_rows.empty());
}

TEST(SolverTest, EmptyInteriorRowsArePromotedToEqualities) {
  MatrixXd q(1, 1);
  q << 2.0;
  VectorXd c(1);
  c << -6.0;
  auto p = make_program(1, q, c);
  p.add_row({{{0, 1.0}}, 2.0, RowSense::LessEqual, "x_le_2"});
  p.add_row({{{0, -1.0}}, -2.0, RowSense::LessEqual, "x_ge_2"});
  const auto sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  EXPECT_NEAR(sol.x[0], 2.0, 1e-8);
}

TEST(SolverTest, FixedVariableThroughEqualBounds) {
  auto p = make_program(2, 2.0 * MatrixXd::Identity(2, 2), VectorXd::Zero(2));
  p.set_bounds(0, 1.5, 1.5);
  p.set_bounds(1, 0.0, 10.0);
  p.add_row({{{0, 1.0}, {1, 1.0}}, 4.0, RowSense::Equal, "sum"});
  const auto sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  EXPECT_NEAR(sol.x[0], 1.5, 1e-9);
  EXPECT_NEAR(sol.x[1], 2.5, 1e-7);
}

TEST(SolverTest, KktResidualsBehave) {
  MatrixXd q(1, 1);
  q << 2.0;
  VectorXd c(1);
  c << -6.0;
  auto p = make_program(1, q, c);
  p.add_row({{{0, 1.0}}, 2.0, RowSense::LessEqual, "cap"});
  const auto sol = solve(p);
  const auto at_opt = kkt_residuals(p, sol.x, sol.multipliers);
  EXPECT_LT(at_opt.max(), 1e-6);

  VectorXd moved = sol.x;
  moved[0] -= 0.5;
  EXPECT_GT(kkt_residuals(p, moved, sol.multipliers).stationarity, 0.5);

  Multipliers zero{VectorXd::Zero(1), VectorXd::Zero(1), VectorXd::Zero(1)};
  VectorXd interior(1);
  interior << 0.3;
  EXPECT_EQ(kkt_residuals(p, interior, zero).complementarity, 0.0);
  EXPECT_THROW(kkt_residuals(p, VectorXd::Zero(3), zero), InvalidInputError);
}

TEST(SolverTest, NonConvexObjectiveIsRejected) {
  auto p = make_program(1, -MatrixXd::Identity(1, 1), VectorXd::Zero(1));
  p.set_bounds(0, -1.0, 1.0);
  EXPECT_THROW(solve(p), ConvexityViolationError);
}

TEST(SolverTest, IterationLimitReturnsBestIterate) {
  auto p = make_program(2, MatrixXd::Identity(2, 2), VectorXd::Ones(2));
  p.add_row({{{0, 1.0}, {1, 1.0}}, -5.0, RowSense::LessEqual, "r"});
  SolverOptions opts;
  opts.max_iterations = 1;
  const auto sol = solve(p, opts);
  EXPECT_EQ(sol.status, SolveStatus::IterationLimit);
  EXPECT_EQ(sol.x.size(), 2);
}

/// Random strictly convex QP with a planted KKT point: Q is SPD, a subset of
/// inequality rows is active at x* with positive multipliers, the rest are
/// slack, and c is chosen so that stationarity holds at x*.
struct PlantedQp {
  ConvexProgram program;
  VectorXd x_star;
};

PlantedQp planted_qp(std::mt19937_64& rng, int n, int m_ineq, int m_eq) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.5, 2.0);
  MatrixXd r(n, n);
  for (auto& v : r.reshaped()) v = normal(rng);
  const MatrixXd q = r * r.transpose() + 0.5 * MatrixXd::Identity(n, n);
  VectorXd x_star(n);
  for (auto& v : x_star) v = normal(rng);

  ConvexProgram p;
  for (int i = 0; i < n; ++i) p.add_variable("x" + std::to_string(i), -kInf, kInf);
  VectorXd stationarity_rhs = -q * x_star;
  for (int k = 0; k < m_ineq; ++k) {
    LinearRow row;
    VectorXd g(n);
    for (int i = 0; i < n; ++i) {
      g[i] = normal(rng);
      row.terms.emplace_back(i, g[i]);
    }
    const bool active = k % 2 == 0;
    row.bound = g.dot(x_star) + (active ? 0.0 : unif(rng));
    row.sense = RowSense::LessEqual;
    row.name = "g" + std::to_string(k);
    if (active) stationarity_rhs -= unif(rng) * g;
    p.add_row(std::move(row));
  }
  for (int k = 0; k < m_eq; ++k) {
    LinearRow row;
    VectorXd a(n);
    for (int i = 0; i < n; ++i) {
      a[i] = normal(rng);
      row.terms.emplace_back(i, a[i]);
    }
    row.bound = a.dot(x_star);
    row.sense = RowSense::Equal;
    row.name = "e" + std::to_string(k);
    stationarity_rhs -= normal(rng) * a;
    p.add_row(std::move(row));
  }
  p.set_objective(std::make_shared<QuadraticObjective>(q, stationarity_rhs));
  return {std::move(p), x_star};
}

TEST(SolverTest, RecoversPlantedKktSolutions) {
  std::mt19937_64 rng(20190513);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 3 + trial % 5;
    auto qp = planted_qp(rng, n, n, trial % 3 == 0 ? 1 : 0);
    const auto sol = solve(qp.program);
    ASSERT_EQ(sol.status, SolveStatus::Optimal) << "trial " << trial;
    EXPECT_LT((sol.x - qp.x_star).lpNorm<Eigen::Infinity>(), 1e-6) << "trial " << trial;
  }
}

TEST(SolverTest, OuterObjectiveIsMonotone) {
  std::mt19937_64 rng(7);
  auto qp = planted_qp(rng, 6, 8, 1);
  const auto sol = solve(qp.program);
  ASSERT_GE(sol.outer_objectives.size(), 3u);
  for (std::size_t k = 1; k < sol.outer_objectives.size(); ++k) {
    const double prev = sol.outer_objectives[k - 1];
    EXPECT_LE(sol.outer_objectives[k], prev + 1e-9 * std::max(1.0, std::abs(prev)));
  }
}

TEST(SolverTest, InvariantToVariableAndRowPermutation) {
  std::mt19937_64 rng(99);
  auto qp = planted_qp(rng, 5, 6, 1);
  const auto base = solve(qp.program);
  ASSERT_EQ(base.status, SolveStatus::Optimal);

  const int n = qp.program.variable_count();
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);  // perm[new] = old
  std::vector<int> inverse(perm.size());
  for (int k = 0; k < n; ++k) inverse[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])] = k;

  const auto& obj = qp.program.objective();
  const MatrixXd q = obj.hessian(VectorXd::Zero(n));
  const VectorXd c = obj.gradient(VectorXd::Zero(n));
  MatrixXd qp_perm(n, n);
  VectorXd c_perm(n);
  for (int a = 0; a < n; ++a) {
    c_perm[a] = c[perm[static_cast<std::size_t>(a)]];
    for (int b = 0; b < n; ++b) qp_perm(a, b) = q(perm[static_cast<std::size_t>(a)], perm[static_cast<std::size_t>(b)]);
  }
  ConvexProgram permuted;
  for (int k = 0; k < n; ++k) permuted.add_variable("y" + std::to_string(k), -kInf, kInf);
  permuted.set_objective(std::make_shared<QuadraticObjective>(qp_perm, c_perm));
  auto rows = qp.program.rows();
  std::reverse(rows.begin(), rows.end());
  for (auto row : rows) {
    for (auto& term : row.terms) term.first = inverse[static_cast<std::size_t>(term.first)];
    permuted.add_row(row);
  }
  const auto other = solve(permuted);
  ASSERT_EQ(other.status, SolveStatus::Optimal);
  for (int k = 0; k < n; ++k) {
    EXPECT_NEAR(other.x[k], base.x[perm[static_cast<std::size_t>(k)]], 1e-6);
  }
}

TEST(SolverTest, IdenticalInputsGiveBitIdenticalOutput) {
  std::mt19937_64 rng(3);
  auto qp = planted_qp(rng, 6, 6, 0);
  const auto a = solve(qp.program);
  const auto b = solve(qp.program);
  ASSERT_EQ(a.x.size(), b.x.size());
  for (Eigen::Index i = 0; i < a.x.size(); ++i) EXPECT_EQ(a.x[i], b.x[i]);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(SolverTest, MildInfeasibilityAmongManyRowsIsCertified) {
  auto p = make_program(2, MatrixXd::Identity(2, 2), VectorXd::Zero(2));
  p.add_row({{{0, 1.0}, {1, 1.0}}, 0.0, RowSense::LessEqual, "sum_le_0"});
  p.add_row({{{0, -1.0}, {1, -1.0}}, -0.4, RowSense::LessEqual, "sum_ge_0.4"});
  for (int k = 0; k < 300; ++k) {
    p.add_row({{{0, 1.0}, {1, 0.01 * k}}, 100.0 + k, RowSense::LessEqual, "loose" + std::to_string(k)});
  }
  const auto sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::Infeasible);
  EXPECT_EQ(sol.violated_rows.size(), 2u);
}

TEST(SolverTest, PhaseOneHandlesUnboundedSlackPairs) {
  // w - e+ + e- = 3 with e+/- unbounded above: loosening both together
  // leaves the equality intact, which must not stall the feasibility search.
  ConvexProgram p;
  p.add_variable("w", 0.0, 10.0);
  p.add_variable("ep", 0.0, kInf);
  p.add_variable("em", 0.0, kInf);
  MatrixXd q = MatrixXd::Zero(3, 3);
  q(0, 0) = 0.2;
  VectorXd c(3);
  c << -1.0, 1.0, 2.0;
  p.set_objective(std::make_shared<QuadraticObjective>(q, c, 2.5));
  p.add_row({{{0, 1.0}, {1, -1.0}, {2, 1.0}}, 3.0, RowSense::Equal, "link"});
  p.add_row({{{0, -1.0}}, -8.0, RowSense::LessEqual, "w_ge_8"});
  const auto sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  EXPECT_NEAR(sol.x[0], 8.0, 1e-6);
  EXPECT_NEAR(sol.x[1], 5.0, 1e-6);
  EXPECT_NEAR(sol.x[2], 0.0, 1e-6);
}

// Smoothed |x - m| with width w: c [(x - m) atan(u) - (w/2) ln(1 + u^2)].
SeparableObjective::Term smooth_abs(double m, double w, double c) {
  return [=](double x) {
    const double d = x - m;
    const double u = d / w;
    return ScalarDerivatives{c * (d * std::atan(u) - 0.5 * w * std::log1p(u * u)), c * std::atan(u),
                             c * w / (d * d + w * w)};
  };
}

TEST(SolverTest, NearlyKinkedSeparableTerm) {
  // x + y = 10, cost y^2 + smoothed slope-s kink at 4. With slope 5 the
  // optimum sits where 2y = 5; with slope 15 it sits on the kink.
  for (const auto& [slope, expected] : {std::pair{5.0, 7.5}, std::pair{15.0, 4.0}}) {
    ConvexProgram p;
    p.add_variable("x", 0.0, 10.0);
    p.add_variable("y", 0.0, 10.0);
    auto obj = std::make_shared<SeparableObjective>(2);
    obj->set_term(0, smooth_abs(4.0, 1e-9, 2.0 * slope / std::numbers::pi));
    obj->set_term(1, [](double y) { return ScalarDerivatives{y * y, 2 * y, 2}; });
    p.set_objective(obj);
    p.add_row({{{0, 1.0}, {1, 1.0}}, 10.0, RowSense::Equal, "balance"});
    const auto sol = solve(p);
    ASSERT_EQ(sol.status, SolveStatus::Optimal) << slope;
    EXPECT_NEAR(sol.x[0], expected, 1e-6) << slope;
  }
}

}  // namespace
}  // namespace ccrtd
