#include "ccrtd/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <set>

#include "ccrtd/errors.hpp"

namespace ccrtd {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::Infeasible:
      return "infeasible";
    case SolveStatus::IterationLimit:
      return "iteration-limit";
  }
  return "unknown";
}

double KktResiduals::max() const {
  return std::max({stationarity, primal_feasibility, complementarity});
}

namespace {

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInteriorMargin = 1e-6;
constexpr double kPhaseOneFeasTol = 1e-6;
constexpr double kCertificateWeight = 1e-3;
constexpr double kRegularization = 1e-10;

enum class Origin { Row, Lower, Upper };

struct Tag {
  Origin origin;
  int index;
  auto operator<=>(const Tag&) const = default;
};

/// min f(x) s.t. G x <= h, A x = b; box bounds folded into G or A.
struct StandardForm {
  int n = 0;
  SparseRows g;
  VectorXd h;
  std::vector<Tag> g_tags;
  SparseRows a;
  VectorXd b;
  std::vector<Tag> a_tags;
};

StandardForm build_standard_form(const ConvexProgram& program, const std::set<Tag>& promoted) {
  StandardForm form;
  form.n = program.variable_count();
  std::vector<Eigen::Triplet<double>> g_trip;
  std::vector<Eigen::Triplet<double>> a_trip;
  std::vector<double> h;
  std::vector<double> b;

  auto push = [](std::vector<Eigen::Triplet<double>>& trip, std::vector<double>& rhs,
                 std::vector<Tag>& tags, const std::vector<std::pair<int, double>>& terms,
                 double sign, double bound, Tag tag) {
    const int r = static_cast<int>(rhs.size());
    for (const auto& [var, coef] : terms) trip.emplace_back(r, var, sign * coef);
    rhs.push_back(sign * bound);
    tags.push_back(tag);
  };

  const auto& rows = program.rows();
  for (int r = 0; r < program.row_count(); ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    const Tag tag{Origin::Row, r};
    if (row.sense == RowSense::Equal || promoted.contains(tag)) {
      push(a_trip, b, form.a_tags, row.terms, 1.0, row.bound, tag);
    } else {
      push(g_trip, h, form.g_tags, row.terms, 1.0, row.bound, tag);
    }
  }
  for (int i = 0; i < form.n; ++i) {
    const double lo = program.lower()[i];
    const double hi = program.upper()[i];
    const std::vector<std::pair<int, double>> unit{{i, 1.0}};
    const bool fix_lower = promoted.contains(Tag{Origin::Lower, i});
    const bool fix_upper = promoted.contains(Tag{Origin::Upper, i});
    if (lo == hi || fix_lower) {
      push(a_trip, b, form.a_tags, unit, 1.0, lo, Tag{Origin::Lower, i});
    } else if (fix_upper) {
      push(a_trip, b, form.a_tags, unit, 1.0, hi, Tag{Origin::Upper, i});
    } else {
      if (std::isfinite(hi)) push(g_trip, h, form.g_tags, unit, 1.0, hi, Tag{Origin::Upper, i});
      if (std::isfinite(lo)) push(g_trip, h, form.g_tags, unit, -1.0, lo, Tag{Origin::Lower, i});
    }
  }
  form.g.resize(static_cast<Eigen::Index>(h.size()), form.n);
  form.g.setFromTriplets(g_trip.begin(), g_trip.end());
  form.h = Eigen::Map<const VectorXd>(h.data(), static_cast<Eigen::Index>(h.size()));
  form.a.resize(static_cast<Eigen::Index>(b.size()), form.n);
  form.a.setFromTriplets(a_trip.begin(), a_trip.end());
  form.b = Eigen::Map<const VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
  return form;
}

std::string describe(const ConvexProgram& program, const Tag& tag) {
  switch (tag.origin) {
    case Origin::Row: {
      const auto& name = program.rows()[static_cast<std::size_t>(tag.index)].name;
      return name.empty() ? "row#" + std::to_string(tag.index) : name;
    }
    case Origin::Lower:
      return "lower_bound(" + program.variable_names()[static_cast<std::size_t>(tag.index)] + ")";
    case Origin::Upper:
      return "upper_bound(" + program.variable_names()[static_cast<std::size_t>(tag.index)] + ")";
  }
  return {};
}

/// Solves [H A^T; A 0][dx; nu] = [r1; r2] through a regularized
/// quasi-definite LDL^T followed by iterative refinement.
void solve_kkt(const MatrixXd& h, const SparseRows& a, const VectorXd& r1, const VectorXd& r2,
               VectorXd& dx, VectorXd& nu) {
  const auto n = h.rows();
  const auto p = a.rows();
  if (p == 0) {
    MatrixXd reg = h;
    reg.diagonal().array() += kRegularization;
    Eigen::LDLT<MatrixXd> ldlt(reg);
    dx = ldlt.solve(r1);
    for (int pass = 0; pass < 2; ++pass) dx += ldlt.solve(r1 - h * dx);
    nu.resize(0);
    return;
  }
  const MatrixXd a_dense(a);
  MatrixXd k(n + p, n + p);
  k.topLeftCorner(n, n) = h;
  k.topRightCorner(n, p) = a_dense.transpose();
  k.bottomLeftCorner(p, n) = a_dense;
  k.bottomRightCorner(p, p).setZero();
  MatrixXd reg = k;
  reg.diagonal().head(n).array() += kRegularization;
  reg.diagonal().tail(p).array() -= kRegularization;
  Eigen::LDLT<MatrixXd> ldlt(reg);
  VectorXd rhs(n + p);
  rhs << r1, r2;
  VectorXd sol = ldlt.solve(rhs);
  for (int pass = 0; pass < 3; ++pass) sol += ldlt.solve(rhs - k * sol);
  dx = sol.head(n);
  nu = sol.tail(p);
}

struct SmoothFunction {
  std::function<double(const VectorXd&)> value;
  std::function<VectorXd(const VectorXd&)> gradient;
  std::function<MatrixXd(const VectorXd&)> hessian;
};

enum class CenterResult { Converged, IterationLimit, EarlyStop, Stalled };

/// Damped Newton minimization of f(x) - mu * sum log(h - G x) subject to
/// A x = b, starting from a strictly feasible x.
class BarrierCentering {
 public:
  BarrierCentering(const SmoothFunction& f, const StandardForm& form, const SolverOptions& options,
                   const char* phase)
      : f_(f), form_(form), options_(options), phase_(phase) {}

  CenterResult center(VectorXd& x, double mu, int& iterations,
                      const std::function<bool(const VectorXd&)>& stop_early = {}) {
    const auto& g = form_.g;
    double previous_decrement = std::numeric_limits<double>::infinity();
    int idle = 0;
    for (;;) {
      const VectorXd s = form_.h - g * x;
      const VectorXd d = s.cwiseInverse();
      const VectorXd grad = f_.gradient(x) + mu * (g.transpose() * d);
      MatrixXd hess = f_.hessian(x);
      if (g.rows() > 0) {
        const SparseRows scaled = (std::sqrt(mu) * d).asDiagonal() * g;
        hess += MatrixXd(SparseRows(scaled.transpose() * scaled));
      }
      const VectorXd eq_residual = form_.a * x - form_.b;

      VectorXd dx;
      solve_kkt(hess, form_.a, -grad, -eq_residual, dx, nu_);
      // Newton decrement of the self-concordant scaling f/mu - sum log s.
      const double decrement = std::max(0.0, dx.dot(hess * dx)) / mu;

      if (options_.verbose && options_.log) {
        *options_.log << phase_ << " it=" << std::setw(4) << iterations << " mu=" << std::scientific
                      << std::setprecision(3) << mu << " f=" << std::setprecision(10)
                      << f_.value(x) << " decrement=" << std::setprecision(3) << decrement
                      << " min_slack=" << (s.size() ? s.minCoeff() : 0.0) << std::defaultfloat
                      << '\n';
      }
      // First-order dual update; exact stationarity at x + dx up to the
      // change in the objective Hessian, and free of the cancellation in s.
      z_ = mu * (d + d.cwiseProduct(d).cwiseProduct(g * dx));
      const double eq_tol = 1e-10 * (1.0 + form_.b.lpNorm<Eigen::Infinity>());
      const bool stalled = decrement < 1e-6 && decrement >= previous_decrement;
      if ((decrement <= 1e-10 || stalled) && eq_residual.lpNorm<Eigen::Infinity>() <= eq_tol) {
        return CenterResult::Converged;
      }
      previous_decrement = decrement;
      if (iterations >= options_.max_iterations) return CenterResult::IterationLimit;

      double step = 1.0;
      if (g.rows() > 0) {
        const VectorXd gdx = g * dx;
        for (Eigen::Index i = 0; i < gdx.size(); ++i) {
          if (gdx[i] > 0.0) step = std::min(step, 0.99 * s[i] / gdx[i]);
        }
      }
      const double max_step = step;
      if (decrement > 1e-2) {
        const double psi0 = merit(x, s, mu);
        const double slope = grad.dot(dx) / mu;
        while (step > 1e-14) {
          const VectorXd trial = x + step * dx;
          const VectorXd ts = form_.h - g * trial;
          if ((ts.array() > 0.0).all() && merit(trial, ts, mu) <= psi0 + 0.01 * step * slope) break;
          step *= options_.backtracking;
        }
        if (step <= 1e-14) return CenterResult::Converged;  // stalled at roundoff
        if (step < max_step * 0.1) step = exact_step(x, dx, mu, max_step, step);
      }
      x += step * dx;
      ++iterations;
      if (stop_early && stop_early(x)) return CenterResult::EarlyStop;
      // Steps that no longer move x mean the Newton system has lost accuracy.
      idle = step * dx.lpNorm<Eigen::Infinity>() <= 1e-13 * (1.0 + x.lpNorm<Eigen::Infinity>()) ? idle + 1 : 0;
      if (idle >= 5) return CenterResult::Stalled;
    }
  }

  /// Equality multipliers at the last solve.
  const VectorXd& nu() const noexcept { return nu_; }
  /// Inequality multipliers at the last solve.
  const VectorXd& z() const noexcept { return z_; }

 private:
  double merit(const VectorXd& x, const VectorXd& s, double mu) const {
    return f_.value(x) / mu - s.array().log().sum();
  }

  // Heavy backtracking means the local quadratic model is poor (objective
  // curvature concentrated near a point, as for a nearly kinked term). The
  // merit is convex along dx, so bisect on its directional derivative and
  // keep whichever of the two steps is better.
  double exact_step(const VectorXd& x, const VectorXd& dx, double mu, double hi, double armijo) const {
    const VectorXd gdx = form_.g * dx;
    const VectorXd s0 = form_.h - form_.g * x;
    auto slope = [&](double t) {
      const VectorXd st = s0 - t * gdx;
      return f_.gradient(x + t * dx).dot(dx) / mu + gdx.cwiseQuotient(st).sum();
    };
    double lo = 0.0;
    if (slope(hi) <= 0.0) return armijo;
    for (int i = 0; i < 60 && hi - lo > 1e-15 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      (slope(mid) < 0.0 ? lo : hi) = mid;
    }
    const double best = lo;
    if (!(best > 0.0)) return armijo;
    const VectorXd sa = s0 - armijo * gdx;
    const VectorXd sb = s0 - best * gdx;
    return merit(x + best * dx, sb, mu) < merit(x + armijo * dx, sa, mu) ? best : armijo;
  }

  const SmoothFunction& f_;
  const StandardForm& form_;
  const SolverOptions& options_;
  const char* phase_;
  VectorXd nu_;
  VectorXd z_;
};

/// Point closest to a box-centred reference that satisfies A x = b.
VectorXd least_norm_start(const ConvexProgram& program, const StandardForm& form) {
  const int n = form.n;
  VectorXd ref(n);
  for (int i = 0; i < n; ++i) {
    const double lo = program.lower()[i];
    const double hi = program.upper()[i];
    if (std::isfinite(lo) && std::isfinite(hi)) {
      ref[i] = 0.5 * (lo + hi);
    } else {
      ref[i] = std::clamp(0.0, lo, hi);
    }
  }
  if (form.a.rows() == 0) return ref;
  VectorXd dx;
  VectorXd nu;
  solve_kkt(MatrixXd::Identity(n, n), form.a, VectorXd::Zero(n), form.b - form.a * ref, dx, nu);
  return ref + dx;
}

struct PhaseOneOutcome {
  enum class Kind { Feasible, Infeasible, Degenerate, IterationLimit } kind;
  VectorXd x;
  std::vector<Tag> weighted;  // rows carrying phase-1 dual weight
};

struct PhaseOneAttempt {
  PhaseOneOutcome result;
  bool box_weighted;  // the certificate leans on the artificial box
};

PhaseOneAttempt phase_one_boxed(const ConvexProgram& program, const StandardForm& form,
                                const SolverOptions& options, int& iterations, const VectorXd& x0,
                                double worst, double reach);

PhaseOneOutcome phase_one(const ConvexProgram& program, const StandardForm& form,
                          const SolverOptions& options, int& iterations) {
  const auto m = form.g.rows();
  VectorXd x0 = least_norm_start(program, form);

  const VectorXd eq_res = form.a * x0 - form.b;
  const double eq_tol = 1e-7 * (1.0 + form.b.lpNorm<Eigen::Infinity>());
  if (eq_res.size() > 0 && eq_res.lpNorm<Eigen::Infinity>() > eq_tol) {
    PhaseOneOutcome out{PhaseOneOutcome::Kind::Infeasible, x0, {}};
    for (Eigen::Index r = 0; r < eq_res.size(); ++r) {
      if (std::abs(eq_res[r]) > eq_tol) out.weighted.push_back(form.a_tags[static_cast<std::size_t>(r)]);
    }
    return out;
  }
  if (m == 0) return {PhaseOneOutcome::Kind::Feasible, x0, {}};
  const double worst = (form.g * x0 - form.h).maxCoeff();
  if (worst < -kInteriorMargin) return {PhaseOneOutcome::Kind::Feasible, x0, {}};

  // Augmented variables (x, sigma): G x - sigma <= h, -sigma <= 1. Sides
  // left open by the program get a box of half-width `reach` around x0;
  // without it the barrier is unbounded below along directions that loosen
  // every row. A certificate leaning on the box is retried with a wider one.
  const double scale = 1.0 + x0.lpNorm<Eigen::Infinity>() + form.h.lpNorm<Eigen::Infinity>();
  for (double reach = 1e3 * scale;; reach *= 1e3) {
    const auto outcome = phase_one_boxed(program, form, options, iterations, x0, worst, reach);
    if (!outcome.box_weighted || reach > 1e12 * scale) return outcome.result;
  }
}

PhaseOneAttempt phase_one_boxed(const ConvexProgram& program, const StandardForm& form,
                                const SolverOptions& options, int& iterations, const VectorXd& x0,
                                double worst, double reach) {
  const int n = form.n;
  const auto m = form.g.rows();
  StandardForm aug;
  aug.n = n + 1;
  {
    std::vector<Eigen::Triplet<double>> trip;
    for (Eigen::Index r = 0; r < m; ++r) {
      for (SparseRows::InnerIterator it(form.g, r); it; ++it) {
        trip.emplace_back(static_cast<int>(r), static_cast<int>(it.col()), it.value());
      }
      trip.emplace_back(static_cast<int>(r), n, -1.0);
    }
    trip.emplace_back(static_cast<int>(m), n, -1.0);
    std::vector<double> box_h;
    for (int i = 0; i < n; ++i) {
      const auto row = static_cast<int>(m + 1 + static_cast<Eigen::Index>(box_h.size()));
      if (!std::isfinite(program.upper()[i])) {
        trip.emplace_back(row, i, 1.0);
        box_h.push_back(x0[i] + reach);
      }
      if (!std::isfinite(program.lower()[i])) {
        trip.emplace_back(static_cast<int>(m + 1 + static_cast<Eigen::Index>(box_h.size())), i, -1.0);
        box_h.push_back(-x0[i] + reach);
      }
    }
    const auto rows = m + 1 + static_cast<Eigen::Index>(box_h.size());
    aug.g.resize(rows, n + 1);
    aug.g.setFromTriplets(trip.begin(), trip.end());
    aug.h.resize(rows);
    aug.h << form.h, 1.0, Eigen::Map<const VectorXd>(box_h.data(), static_cast<Eigen::Index>(box_h.size()));
    std::vector<Eigen::Triplet<double>> atrip;
    for (Eigen::Index r = 0; r < form.a.rows(); ++r) {
      for (SparseRows::InnerIterator it(form.a, r); it; ++it) {
        atrip.emplace_back(static_cast<int>(r), static_cast<int>(it.col()), it.value());
      }
    }
    aug.a.resize(form.a.rows(), n + 1);
    aug.a.setFromTriplets(atrip.begin(), atrip.end());
    aug.b = form.b;
  }

  const SmoothFunction sigma_objective{
      [n](const VectorXd& y) { return y[n]; },
      [n](const VectorXd& y) {
        VectorXd g = VectorXd::Zero(y.size());
        g[n] = 1.0;
        return g;
      },
      [](const VectorXd& y) { return MatrixXd(MatrixXd::Zero(y.size(), y.size())); }};

  VectorXd y(n + 1);
  y << x0, worst + 1.0;
  BarrierCentering centering(sigma_objective, aug, options, "phase1");
  double mu = options.initial_barrier;
  const auto below_margin = [n](const VectorXd& v) { return v[n] < -kInteriorMargin; };
  for (;;) {
    const auto result = centering.center(y, mu, iterations, below_margin);
    if (result == CenterResult::EarlyStop || y[n] < -kInteriorMargin) {
      return {{PhaseOneOutcome::Kind::Feasible, y.head(n), {}}, false};
    }
    if (result == CenterResult::IterationLimit) {
      return {{PhaseOneOutcome::Kind::IterationLimit, y.head(n), {}}, false};
    }
    // Centered points bound the optimum from below by sigma - mu (m + 1).
    const double gap = mu * static_cast<double>(aug.g.rows());
    const bool certified = y[n] - gap > kPhaseOneFeasTol && gap <= 1e-3 * y[n];
    if (certified || gap < 1e-10) {
      const VectorXd s = aug.h - aug.g * y;
      PhaseOneOutcome out{y[n] > kPhaseOneFeasTol ? PhaseOneOutcome::Kind::Infeasible
                                                   : PhaseOneOutcome::Kind::Degenerate,
                          y.head(n),
                          {}};
      Eigen::Index heaviest = 0;
      for (Eigen::Index r = 0; r < m; ++r) {
        if (mu / s[r] >= kCertificateWeight) out.weighted.push_back(form.g_tags[static_cast<std::size_t>(r)]);
        if (s[r] < s[heaviest]) heaviest = r;
      }
      if (out.weighted.empty()) out.weighted.push_back(form.g_tags[static_cast<std::size_t>(heaviest)]);
      bool box_weighted = false;
      for (Eigen::Index r = m + 1; r < aug.g.rows(); ++r) box_weighted |= mu / s[r] >= kCertificateWeight;
      return {std::move(out), box_weighted};
    }
    mu *= options.barrier_reduction;
  }
}

void check_convexity(const MatrixXd& hessian) {
  MatrixXd shifted = hessian;
  shifted.diagonal().array() += 1e-8;
  Eigen::LLT<MatrixXd> llt(shifted);
  if (llt.info() == Eigen::Success) return;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(hessian, Eigen::EigenvaluesOnly);
  const double smallest = eig.eigenvalues().minCoeff();
  if (smallest < -1e-8) {
    throw ConvexityViolationError("objective Hessian has negative curvature " +
                                  std::to_string(smallest));
  }
}

Multipliers map_multipliers(const ConvexProgram& program, const StandardForm& form,
                            const VectorXd& z, const VectorXd& lambda) {
  Multipliers out;
  out.rows = VectorXd::Zero(program.row_count());
  out.lower = VectorXd::Zero(program.variable_count());
  out.upper = VectorXd::Zero(program.variable_count());
  auto assign = [&](const Tag& tag, double value, bool equality) {
    switch (tag.origin) {
      case Origin::Row:
        out.rows[tag.index] += value;
        break;
      case Origin::Lower:
        // Fixed variables: x_i = v contributes +lambda e_i to stationarity.
        if (equality) {
          out.upper[tag.index] += std::max(value, 0.0);
          out.lower[tag.index] += std::max(-value, 0.0);
        } else {
          out.lower[tag.index] += value;
        }
        break;
      case Origin::Upper:
        if (equality) {
          out.upper[tag.index] += std::max(value, 0.0);
          out.lower[tag.index] += std::max(-value, 0.0);
        } else {
          out.upper[tag.index] += value;
        }
        break;
    }
  };
  for (Eigen::Index r = 0; r < z.size(); ++r) assign(form.g_tags[static_cast<std::size_t>(r)], z[r], false);
  for (Eigen::Index r = 0; r < lambda.size(); ++r) {
    assign(form.a_tags[static_cast<std::size_t>(r)], lambda[r], true);
  }
  return out;
}

}  // namespace

KktResiduals kkt_residuals(const ConvexProgram& program, const Eigen::VectorXd& x,
                           const Multipliers& multipliers) {
  const int n = program.variable_count();
  if (x.size() != n || multipliers.rows.size() != program.row_count() ||
      multipliers.lower.size() != n || multipliers.upper.size() != n) {
    throw InvalidInputError("kkt_residuals: dimension mismatch");
  }
  KktResiduals res;
  VectorXd station = program.objective().gradient(x) - multipliers.lower + multipliers.upper;
  const auto& rows = program.rows();
  for (int r = 0; r < program.row_count(); ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    const double m = multipliers.rows[r];
    for (const auto& [var, coef] : row.terms) station[var] += m * coef;
    const double gap = row.activity(x) - row.bound;
    if (row.sense == RowSense::Equal) {
      res.primal_feasibility = std::max(res.primal_feasibility, std::abs(gap));
    } else {
      res.primal_feasibility = std::max(res.primal_feasibility, gap);
      res.complementarity = std::max(res.complementarity, std::abs(m * gap));
    }
  }
  for (int i = 0; i < n; ++i) {
    const double lo = program.lower()[i];
    const double hi = program.upper()[i];
    if (std::isfinite(lo)) {
      res.primal_feasibility = std::max(res.primal_feasibility, lo - x[i]);
      res.complementarity = std::max(res.complementarity, std::abs(multipliers.lower[i] * (x[i] - lo)));
    }
    if (std::isfinite(hi)) {
      res.primal_feasibility = std::max(res.primal_feasibility, x[i] - hi);
      res.complementarity = std::max(res.complementarity, std::abs(multipliers.upper[i] * (hi - x[i])));
    }
  }
  res.stationarity = station.lpNorm<Eigen::Infinity>();
  return res;
}

Solution solve(const ConvexProgram& program, const SolverOptions& options) {
  program.validate();
  if (!(options.kkt_tolerance > 0.0) || !(options.barrier_reduction > 0.0 && options.barrier_reduction < 1.0) ||
      !(options.backtracking > 0.0 && options.backtracking < 1.0) || !(options.initial_barrier > 0.0)) {
    throw InvalidInputError("solver options out of range");
  }

  Solution solution;
  std::set<Tag> promoted;
  StandardForm form = build_standard_form(program, promoted);
  int phase_one_iterations = 0;
  VectorXd x;
  for (int round = 0;; ++round) {
    auto outcome = phase_one(program, form, options, phase_one_iterations);
    if (outcome.kind == PhaseOneOutcome::Kind::Feasible) {
      x = std::move(outcome.x);
      break;
    }
    if (outcome.kind == PhaseOneOutcome::Kind::IterationLimit) {
      solution.x = outcome.x;
      solution.objective = program.objective().value(outcome.x);
      solution.status = SolveStatus::IterationLimit;
      solution.iterations = phase_one_iterations;
      return solution;
    }
    if (outcome.kind == PhaseOneOutcome::Kind::Infeasible || round >= 5) {
      solution.x = outcome.x;
      solution.objective = program.objective().value(outcome.x);
      solution.status = SolveStatus::Infeasible;
      solution.iterations = phase_one_iterations;
      for (const auto& tag : outcome.weighted) solution.violated_rows.push_back(describe(program, tag));
      return solution;
    }
    // Empty interior: treat the blocking rows as equalities and retry.
    for (const auto& tag : outcome.weighted) promoted.insert(tag);
    form = build_standard_form(program, promoted);
  }

  const Objective& objective = program.objective();
  const SmoothFunction f{[&](const VectorXd& v) { return objective.value(v); },
                         [&](const VectorXd& v) { return objective.gradient(v); },
                         [&](const VectorXd& v) { return objective.hessian(v); }};
  BarrierCentering centering(f, form, options, "phase2");
  int iterations = 0;
  double mu = options.initial_barrier;
  struct Certified {
    VectorXd x;
    Multipliers multipliers;
    KktResiduals residuals;
  };
  std::optional<Certified> fallback;
  for (;;) {
    check_convexity(objective.hessian(x));
    const auto result = centering.center(x, mu, iterations);
    solution.outer_objectives.push_back(objective.value(x));

    const VectorXd z = centering.z().cwiseMax(0.0);
    const VectorXd& lambda = centering.nu();
    solution.multipliers = map_multipliers(program, form, z, lambda);
    solution.residuals = kkt_residuals(program, x, solution.multipliers);
    if (options.verbose && options.log) {
      *options.log << "phase2 mu=" << std::scientific << std::setprecision(3) << mu
                   << " stationarity=" << solution.residuals.stationarity
                   << " primal=" << solution.residuals.primal_feasibility
                   << " complementarity=" << solution.residuals.complementarity << std::defaultfloat << '\n';
    }

    const bool certified = result == CenterResult::Converged && solution.residuals.max() <= options.kkt_tolerance;
    if (certified && mu <= 1e-3 * options.kkt_tolerance) {
      solution.status = SolveStatus::Optimal;
      break;
    }
    if (result != CenterResult::Converged || mu < 1e-14 || (!certified && fallback)) {
      // Tiny barrier weights can defeat the Newton solves; fall back to the
      // last center whose KKT residuals were already within tolerance.
      if (fallback) {
        x = fallback->x;
        solution.multipliers = std::move(fallback->multipliers);
        solution.residuals = fallback->residuals;
        solution.status = SolveStatus::Optimal;
      } else {
        solution.status = SolveStatus::IterationLimit;
      }
      break;
    }
    if (certified && mu <= options.kkt_tolerance) fallback = Certified{x, solution.multipliers, solution.residuals};
    mu *= options.barrier_reduction;
  }
  solution.x = x;
  solution.objective = objective.value(x);
  solution.iterations = phase_one_iterations + iterations;
  return solution;
}

}  // namespace ccrtd
