#include "ccrtd/dispatch_model.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <memory>
#include <numbers>
#include <ostream>

#include "ccrtd/errors.hpp"

namespace ccrtd {

using std::numbers::pi;

namespace {

void check_risk(double value, const char* name) {
  if (!(value > 0.0 && value < 0.5)) {
    throw InvalidInputError(std::string("risk level ") + name + " must lie in (0, 0.5)");
  }
}

std::string tag(const std::string& family, const std::string& element, int t) {
  std::string s = family + "[";
  if (!element.empty()) s += element + ",";
  return s + "t" + std::to_string(t + 1) + "]";
}

void check_generator(const Generator& g, int buses, const std::string& kind) {
  if (g.bus < 0 || g.bus >= buses) throw InvalidInputError(kind + " '" + g.name + "' has an invalid bus");
  if (!std::isfinite(g.p_min) || !std::isfinite(g.p_max)) {
    throw InvalidInputError(kind + " '" + g.name + "' needs finite output limits");
  }
  if (g.p_min > g.p_max) {
    throw InfeasibleConfigError(kind + " '" + g.name + "' has minimum output above maximum");
  }
  if (g.cost.a < 0.0) throw InvalidInputError(kind + " '" + g.name + "' has a concave cost curve");
  if (!(g.ramp_up >= 0.0) || !(g.ramp_down >= 0.0)) {
    throw InvalidInputError(kind + " '" + g.name + "' has a negative ramp rate");
  }
}

// Incremental row construction shared by the constraint families.
class Builder {
 public:
  Builder(const DispatchProblem& problem, AssembledModel& model)
      : problem_(problem), model_(model), index_(model.index) {}

  void add(LinearRow row, RowFamily family, int t, int element, bool upper) {
    model_.program.add_row(std::move(row));
    model_.row_info.push_back({family, t, element, upper});
  }

  void add_chance(const CompactChanceConstraint& c, const MultivariateCauchy& dist, RowFamily family, int t,
                  int element, bool upper) {
    add(convert_chance_row(c, dist), family, t, element, upper);
  }

  void balance() {
    const auto& p = problem_;
    for (int t = 0; t < p.periods(); ++t) {
      LinearRow row{{}, p.loads.row(t).sum(), RowSense::Equal, tag("balance", "", t)};
      for (const auto& v : index_.non_agc) row.terms.emplace_back(v[t], 1.0);
      for (const auto& v : index_.agc) row.terms.emplace_back(v[t], 1.0);
      for (const auto& v : index_.wind) row.terms.emplace_back(v[t], 1.0);
      add(std::move(row), RowFamily::Balance, t, -1, true);

      LinearRow link{{{index_.wind_total[t], 1.0}}, 0.0, RowSense::Equal, tag("wind_link", "", t)};
      for (const auto& v : index_.wind) link.terms.emplace_back(v[t], -1.0);
      add(std::move(link), RowFamily::WindLink, t, -1, true);
    }
  }

  void agc_capacity() {
    const auto& p = problem_;
    const auto k = static_cast<Eigen::Index>(p.wind_farms.size());
    for (int t = 0; t < p.periods(); ++t) {
      const auto& dist = p.forecasts[t].dist;
      for (std::size_t j = 0; j < p.agc.size(); ++j) {
        const auto& unit = p.agc[j];
        const double alpha = unit.participation;
        if (alpha <= 0.0) continue;
        const int pv = index_.agc[j][t];
        const int wv = index_.wind_total[t];
        const auto e = static_cast<int>(j);
        add_chance({{{pv, 1.0}, {wv, alpha}}, Eigen::VectorXd::Constant(k, -alpha), unit.p_max, p.risk.delta,
                    ChanceSense::AtMost, tag("agc_capacity_up", unit.name, t)},
                   dist, RowFamily::AgcCapacity, t, e, true);
        add_chance({{{pv, 1.0}, {wv, alpha}}, Eigen::VectorXd::Constant(k, -alpha), unit.p_min, p.risk.delta,
                    ChanceSense::AtLeast, tag("agc_capacity_down", unit.name, t)},
                   dist, RowFamily::AgcCapacity, t, e, false);
      }
    }
  }

  // Deterministic ramp rows on base points; t = 0 is anchored at the
  // initial output.
  void base_ramp(const Generator& g, const std::vector<int>& vars, int t, RowFamily family, int element) {
    const double dt = problem_.horizon.minutes;
    const bool first = t == 0;
    const double anchor = first ? g.initial_output : 0.0;
    auto terms = [&](double sign) {
      std::vector<std::pair<int, double>> out{{vars[t], sign}};
      if (!first) out.emplace_back(vars[t - 1], -sign);
      return out;
    };
    if (std::isfinite(g.ramp_up)) {
      add({terms(1.0), g.ramp_up * dt + anchor, RowSense::LessEqual, tag("ramp_up", g.name, t)}, family, t,
          element, true);
    }
    if (std::isfinite(g.ramp_down)) {
      add({terms(-1.0), g.ramp_down * dt - anchor, RowSense::LessEqual, tag("ramp_down", g.name, t)}, family, t,
          element, false);
    }
  }

  void non_agc_ramp() {
    for (int t = 0; t < problem_.periods(); ++t) {
      for (std::size_t i = 0; i < problem_.non_agc.size(); ++i) {
        base_ramp(problem_.non_agc[i], index_.non_agc[i], t, RowFamily::NonAgcRamp, static_cast<int>(i));
      }
    }
  }

  void agc_ramp(bool aprr) {
    const auto& p = problem_;
    const double dt = p.horizon.minutes;
    const auto k = static_cast<Eigen::Index>(p.wind_farms.size());
    for (int t = 0; t < p.periods(); ++t) {
      if (t == 0 || !aprr) {
        for (std::size_t j = 0; j < p.agc.size(); ++j) {
          base_ramp(p.agc[j], index_.agc[j], t, RowFamily::AgcRamp, static_cast<int>(j));
        }
        continue;
      }
      // Joint law of (wind_t, wind_{t-1}) with block-diagonal scale.
      const auto& now = p.forecasts[t].dist;
      const auto& prev = p.forecasts[t - 1].dist;
      Eigen::VectorXd mu(2 * k);
      mu << now.location(), prev.location();
      Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(2 * k, 2 * k);
      sigma.topLeftCorner(k, k) = now.scale_matrix();
      sigma.bottomRightCorner(k, k) = prev.scale_matrix();
      const MultivariateCauchy joint(std::move(mu), std::move(sigma));

      for (std::size_t j = 0; j < p.agc.size(); ++j) {
        const auto& unit = p.agc[j];
        const double alpha = unit.participation;
        const auto e = static_cast<int>(j);
        if (alpha <= 0.0) {
          base_ramp(unit, index_.agc[j], t, RowFamily::AgcRamp, e);
          continue;
        }
        std::vector<std::pair<int, double>> terms{{index_.agc[j][t], 1.0},
                                                  {index_.agc[j][t - 1], -1.0},
                                                  {index_.wind_total[t], alpha},
                                                  {index_.wind_total[t - 1], -alpha}};
        Eigen::VectorXd random(2 * k);
        random << Eigen::VectorXd::Constant(k, -alpha), Eigen::VectorXd::Constant(k, alpha);
        if (std::isfinite(unit.ramp_up)) {
          add_chance({terms, random, unit.ramp_up * dt, p.risk.beta, ChanceSense::AtMost,
                      tag("agc_ramp_up", unit.name, t)},
                     joint, RowFamily::AgcRamp, t, e, true);
        }
        if (std::isfinite(unit.ramp_down)) {
          add_chance({terms, random, -unit.ramp_down * dt, p.risk.beta, ChanceSense::AtLeast,
                      tag("agc_ramp_down", unit.name, t)},
                     joint, RowFamily::AgcRamp, t, e, false);
        }
      }
    }
  }

  void reserve() {
    const auto& p = problem_;
    const auto k = static_cast<Eigen::Index>(p.wind_farms.size());
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(k);
    double cap_max = 0.0;
    double cap_min = 0.0;
    for (const auto& u : p.agc) {
      cap_max += u.p_max;
      cap_min += u.p_min;
    }
    for (int t = 0; t < p.periods(); ++t) {
      const double up = p.reserve_up.size() ? p.reserve_up[t] : 0.0;
      const double down = p.reserve_down.size() ? p.reserve_down[t] : 0.0;
      std::vector<std::pair<int, double>> terms{{index_.wind_total[t], 1.0}};
      for (const auto& v : index_.agc) terms.emplace_back(v[t], 1.0);
      const auto& dist = p.forecasts[t].dist;
      // Upward headroom: sum(p_max - p~) >= R+ with p~ = p - alpha (w~ - w).
      add_chance({terms, -ones, cap_max - up, p.risk.epsilon, ChanceSense::AtMost, tag("reserve_up", "", t)},
                 dist, RowFamily::Reserve, t, -1, true);
      add_chance({terms, -ones, cap_min + down, p.risk.epsilon, ChanceSense::AtLeast, tag("reserve_down", "", t)},
                 dist, RowFamily::Reserve, t, -1, false);
    }
  }

  void transmission(const PtdfMatrix& ptdf, bool affine) {
    const auto& p = problem_;
    const auto k = static_cast<Eigen::Index>(p.wind_farms.size());
    for (Eigen::Index l = 0; l < ptdf.line_count(); ++l) {
      const auto& line = p.grid.lines[static_cast<std::size_t>(l)];
      if (!std::isfinite(line.limit)) continue;
      double recourse = 0.0;
      if (affine) {
        for (const auto& u : p.agc) recourse += ptdf(l, u.bus) * u.participation;
      }
      Eigen::VectorXd random(k);
      for (Eigen::Index f = 0; f < k; ++f) {
        random[f] = ptdf(l, p.wind_farms[static_cast<std::size_t>(f)].bus) - recourse;
      }
      const bool stochastic = random.cwiseAbs().maxCoeff() > 1e-12;
      const auto e = static_cast<int>(l);
      const std::string name = line.name.empty() ? "L" + std::to_string(l + 1) : line.name;

      for (int t = 0; t < p.periods(); ++t) {
        std::vector<std::pair<int, double>> terms;
        for (std::size_t i = 0; i < p.non_agc.size(); ++i) {
          const double g = ptdf(l, p.non_agc[i].bus);
          if (g != 0.0) terms.emplace_back(index_.non_agc[i][t], g);
        }
        for (std::size_t j = 0; j < p.agc.size(); ++j) {
          const double g = ptdf(l, p.agc[j].bus);
          if (g != 0.0) terms.emplace_back(index_.agc[j][t], g);
        }
        if (recourse != 0.0) terms.emplace_back(index_.wind_total[t], recourse);
        double load_flow = 0.0;
        for (Eigen::Index d = 0; d < p.loads.cols(); ++d) load_flow += ptdf(l, d) * p.loads(t, d);

        if (!stochastic) {
          // Recourse cancels the wind: flow = terms . u - load_flow.
          add({terms, line.limit + load_flow, RowSense::LessEqual, tag("line_max", name, t)},
              RowFamily::Transmission, t, e, true);
          auto negated = terms;
          for (auto& term : negated) term.second = -term.second;
          add({negated, line.limit - load_flow, RowSense::LessEqual, tag("line_min", name, t)},
              RowFamily::Transmission, t, e, false);
          continue;
        }
        const auto& dist = p.forecasts[t].dist;
        add_chance({terms, random, line.limit + load_flow, p.risk.eta, ChanceSense::AtMost, tag("line_max", name, t)},
                   dist, RowFamily::Transmission, t, e, true);
        add_chance(
            {terms, random, -line.limit + load_flow, p.risk.eta, ChanceSense::AtLeast, tag("line_min", name, t)},
            dist, RowFamily::Transmission, t, e, false);
      }
    }
  }

 private:
  const DispatchProblem& problem_;
  AssembledModel& model_;
  const VariableIndex& index_;
};

}  // namespace

void RiskLevels::validate() const {
  check_risk(delta, "delta");
  check_risk(beta, "beta");
  check_risk(epsilon, "epsilon");
  check_risk(eta, "eta");
}

void DispatchProblem::validate() const {
  grid.validate();
  if (horizon.periods < 1) throw InvalidInputError("horizon needs at least one period");
  if (!(horizon.minutes > 0.0)) throw InvalidInputError("period length must be positive");
  const int t_count = horizon.periods;
  const int buses = grid.bus_count;
  if (loads.rows() != t_count || loads.cols() != buses) {
    throw InvalidInputError("loads must be periods x buses");
  }
  if (!loads.allFinite()) throw InvalidInputError("loads must be finite");
  if (static_cast<int>(forecasts.size()) != t_count) {
    throw InvalidInputError("one wind forecast per period is required");
  }
  if (wind_farms.empty()) throw InvalidInputError("at least one wind farm is required");
  if (agc.empty()) throw InvalidInputError("at least one AGC unit is required");
  for (const auto& farm : wind_farms) {
    if (farm.bus < 0 || farm.bus >= buses) throw InvalidInputError("wind farm '" + farm.name + "' has an invalid bus");
  }
  const auto k = static_cast<Eigen::Index>(wind_farms.size());
  for (const auto& f : forecasts) {
    if (f.dist.dimension() != k || f.caps.size() != k) {
      throw InvalidInputError("forecast dimension does not match the wind farm count");
    }
    if ((f.caps.array() < 0.0).any() || !f.caps.allFinite()) {
      throw InvalidInputError("wind caps must be finite and nonnegative");
    }
    if (!(f.total_cap > 0.0) || !std::isfinite(f.total_cap)) {
      throw InvalidInputError("total available wind must be positive");
    }
  }
  for (const auto& g : non_agc) check_generator(g, buses, "unit");
  double alpha_sum = 0.0;
  for (const auto& g : agc) {
    check_generator(g, buses, "AGC unit");
    if (!(g.participation >= 0.0 && g.participation <= 1.0)) {
      throw InvalidInputError("AGC unit '" + g.name + "' has a participation factor outside [0, 1]");
    }
    if (!(g.gamma_up >= 0.0) || !(g.gamma_down >= 0.0)) {
      throw InvalidInputError("AGC unit '" + g.name + "' has a negative regulation price");
    }
    alpha_sum += g.participation;
  }
  if (std::abs(alpha_sum - 1.0) > 1e-9) throw InvalidInputError("participation factors must sum to 1");
  risk.validate();
  for (const auto* r : {&reserve_up, &reserve_down}) {
    if (r->size() != 0 && (r->size() != t_count || (r->array() < 0.0).any())) {
      throw InvalidInputError("reserves must be nonnegative with one value per period");
    }
  }
}

void assign_proportional_participation(std::vector<AgcUnit>& units) {
  double total = 0.0;
  for (const auto& u : units) total += u.p_max;
  if (!(total > 0.0)) throw InvalidInputError("proportional participation needs positive AGC capacity");
  for (auto& u : units) u.participation = u.p_max / total;
}

UnivariateCauchy aggregate_wind(const WindForecastPeriod& forecast) {
  return linear_combination(forecast.dist, Eigen::VectorXd::Ones(forecast.dist.dimension()));
}

CorrectiveCostTerm::CorrectiveCostTerm(const UnivariateCauchy& aggregate, double total_cap,
                                       std::span<const AgcUnit> fleet)
    : location_(aggregate.location()), scale_(aggregate.scale()), total_cap_(total_cap) {
  const double at_zero = std::atan(-location_ / scale_);
  const double at_cap = std::atan((total_cap - location_) / scale_);
  const double g_zero = antiderivative_x_pdf(aggregate, 0.0);
  const double g_cap = antiderivative_x_pdf(aggregate, total_cap);
  for (const auto& u : fleet) {
    const double alpha = u.participation;
    a_ += alpha * (u.gamma_up * g_zero + u.gamma_down * g_cap);
    b_ -= alpha * (u.gamma_up * at_zero + u.gamma_down * at_cap) / pi;
    c_ += alpha * (u.gamma_up + u.gamma_down) / pi;
  }
}

ScalarDerivatives CorrectiveCostTerm::evaluate(double w) const {
  const double d = w - location_;
  const double u = d / scale_;
  const double arc = std::atan(u);
  return {a_ + b_ * w - 0.5 * c_ * scale_ * std::log1p(u * u) + c_ * d * arc, b_ + c_ * arc,
          c_ * scale_ / (d * d + scale_ * scale_)};
}

ScalarDerivatives corrective_cost(const CorrectiveCostTerm& term, double w) {
  if (!(w >= 0.0 && w <= term.total_cap())) {
    throw DomainError("scheduled wind outside [0, total available wind]");
  }
  return term.evaluate(w);
}

double generation_cost(std::span<const CostCurve> curves, const Eigen::Ref<const Eigen::MatrixXd>& outputs) {
  if (outputs.rows() != static_cast<Eigen::Index>(curves.size())) {
    throw InvalidInputError("generation_cost: one output row per unit is required");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < outputs.rows(); ++i) {
    for (Eigen::Index t = 0; t < outputs.cols(); ++t) total += curves[static_cast<std::size_t>(i)](outputs(i, t));
  }
  return total;
}

LinearRow convert_chance_row(const CompactChanceConstraint& c, const MultivariateCauchy& dist) {
  if (!(c.risk > 0.0 && c.risk < 0.5)) throw DomainError("risk level must lie in (0, 0.5)");
  if (c.random.size() != dist.dimension()) throw InvalidInputError("random coefficient dimension mismatch");
  if (c.random.cwiseAbs().maxCoeff() == 0.0) {
    throw DegenerateDistributionError("chance row '" + c.name + "' has no random part");
  }
  const UnivariateCauchy y = linear_combination(dist, c.random);
  LinearRow row{c.decision, 0.0, RowSense::LessEqual, c.name};
  if (c.sense == ChanceSense::AtMost) {
    row.bound = c.bound - quantile(y, 1.0 - c.risk);
  } else {
    for (auto& term : row.terms) term.second = -term.second;
    row.bound = quantile(y, c.risk) - c.bound;
  }
  return row;
}

std::string to_string(RowFamily family) {
  switch (family) {
    case RowFamily::Balance: return "balance";
    case RowFamily::WindLink: return "wind_link";
    case RowFamily::AgcCapacity: return "agc_capacity";
    case RowFamily::NonAgcRamp: return "non_agc_ramp";
    case RowFamily::AgcRamp: return "agc_ramp";
    case RowFamily::Reserve: return "reserve";
    case RowFamily::Transmission: return "transmission";
  }
  return "unknown";
}

AssembledModel assemble(const DispatchProblem& problem, const PtdfMatrix& ptdf, const AssemblyOptions& options) {
  if (ptdf.bus_count() != problem.grid.bus_count ||
      ptdf.line_count() != static_cast<Eigen::Index>(problem.grid.lines.size())) {
    throw InvalidInputError("PTDF does not match the grid");
  }
  const int t_count = problem.periods();
  AssembledModel model;
  auto& prog = model.program;
  auto& index = model.index;

  for (const auto& g : problem.non_agc) {
    auto& vars = index.non_agc.emplace_back();
    for (int t = 0; t < t_count; ++t) vars.push_back(prog.add_variable(tag("p", g.name, t), g.p_min, g.p_max));
  }
  for (const auto& g : problem.agc) {
    auto& vars = index.agc.emplace_back();
    for (int t = 0; t < t_count; ++t) vars.push_back(prog.add_variable(tag("pa", g.name, t), g.p_min, g.p_max));
  }
  for (std::size_t k = 0; k < problem.wind_farms.size(); ++k) {
    auto& vars = index.wind.emplace_back();
    const auto& farm = problem.wind_farms[k];
    for (int t = 0; t < t_count; ++t) {
      const double cap = problem.forecasts[t].caps[static_cast<Eigen::Index>(k)];
      vars.push_back(prog.add_variable(tag("pw", farm.name, t), 0.0, cap));
    }
  }
  for (int t = 0; t < t_count; ++t) {
    index.wind_total.push_back(prog.add_variable(tag("w", "", t), 0.0, problem.forecasts[t].total_cap));
    model.corrective.emplace_back(aggregate_wind(problem.forecasts[t]), problem.forecasts[t].total_cap,
                                  std::span<const AgcUnit>(problem.agc));
  }

  auto objective = std::make_shared<SeparableObjective>(prog.variable_count());
  const double h = problem.hours();
  auto set_quadratic = [&](const Generator& g, const std::vector<int>& vars) {
    const CostCurve curve = g.cost;
    for (int v : vars) {
      objective->set_term(v, [curve, h](double p) {
        return ScalarDerivatives{h * curve(p), h * (2.0 * curve.a * p + curve.b), h * 2.0 * curve.a};
      });
    }
  };
  for (std::size_t i = 0; i < problem.non_agc.size(); ++i) set_quadratic(problem.non_agc[i], index.non_agc[i]);
  for (std::size_t j = 0; j < problem.agc.size(); ++j) set_quadratic(problem.agc[j], index.agc[j]);
  for (int t = 0; t < t_count; ++t) {
    const CorrectiveCostTerm term = model.corrective[static_cast<std::size_t>(t)];
    objective->set_term(index.wind_total[t], [term, h](double w) {
      const auto d = term.evaluate(w);
      return ScalarDerivatives{h * d.value, h * d.first, h * d.second};
    });
  }
  prog.set_objective(objective);

  Builder builder(problem, model);
  builder.balance();
  builder.agc_capacity();
  builder.non_agc_ramp();
  builder.agc_ramp(options.aprr);
  builder.reserve();
  builder.transmission(ptdf, options.affine_lines);

  for (int v = 0; v < prog.variable_count(); ++v) {
    model.bound_count += std::isfinite(prog.lower()[v]) + std::isfinite(prog.upper()[v]);
  }
  const auto units = problem.non_agc.size() + problem.agc.size();
  const auto expected = (units + problem.wind_farms.size() + 1) * static_cast<std::size_t>(t_count);
  if (static_cast<std::size_t>(prog.variable_count()) != expected ||
      model.row_info.size() != static_cast<std::size_t>(prog.row_count())) {
    throw Error("internal error: model dimension audit failed");
  }
  prog.validate();
  return model;
}

void write_model_dump(std::ostream& out, const AssembledModel& model) {
  const auto& prog = model.program;
  const auto& names = prog.variable_names();
  out << std::setprecision(10);
  out << "variables " << prog.variable_count() << "\n";
  for (int v = 0; v < prog.variable_count(); ++v) {
    out << "  " << names[static_cast<std::size_t>(v)] << " in [" << prog.lower()[v] << ", " << prog.upper()[v]
        << "]\n";
  }
  out << "rows " << prog.row_count() << "\n";
  for (std::size_t r = 0; r < prog.rows().size(); ++r) {
    const auto& row = prog.rows()[r];
    out << "  " << row.name << " (" << to_string(model.row_info[r].family) << "):";
    for (const auto& [var, coef] : row.terms) {
      out << ' ' << (coef < 0 ? "- " : "+ ") << std::abs(coef) << ' ' << names[static_cast<std::size_t>(var)];
    }
    out << (row.sense == RowSense::Equal ? " = " : " <= ") << row.bound << "\n";
  }
}

void evaluate_costs(const DispatchProblem& problem, DispatchSchedule& schedule) {
  std::vector<CostCurve> curves;
  for (const auto& g : problem.non_agc) curves.push_back(g.cost);
  const double h = problem.hours();
  schedule.generation_cost = h * generation_cost(curves, schedule.non_agc);
  curves.clear();
  for (const auto& g : problem.agc) curves.push_back(g.cost);
  schedule.generation_cost += h * generation_cost(curves, schedule.agc);
  schedule.corrective_cost = 0.0;
  for (int t = 0; t < problem.periods(); ++t) {
    const auto& f = problem.forecasts[static_cast<std::size_t>(t)];
    const CorrectiveCostTerm term(aggregate_wind(f), f.total_cap, problem.agc);
    schedule.corrective_cost += h * term.evaluate(schedule.wind_total[t]).value;
  }
}

DispatchSchedule extract_schedule(const DispatchProblem& problem, const AssembledModel& model,
                                  const Eigen::VectorXd& x) {
  const int t_count = problem.periods();
  const auto& index = model.index;
  auto gather = [&](const std::vector<std::vector<int>>& vars) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(vars.size()), t_count);
    for (std::size_t i = 0; i < vars.size(); ++i) {
      for (int t = 0; t < t_count; ++t) out(static_cast<Eigen::Index>(i), t) = x[vars[i][t]];
    }
    return out;
  };
  DispatchSchedule s;
  s.non_agc = gather(index.non_agc);
  s.agc = gather(index.agc);
  s.wind = gather(index.wind);
  s.wind_total.resize(t_count);
  for (int t = 0; t < t_count; ++t) s.wind_total[t] = x[index.wind_total[t]];
  evaluate_costs(problem, s);
  return s;
}

DispatchResult dispatch(const DispatchProblem& problem, const AssemblyOptions& options,
                        const SolverOptions& solver_options) {
  problem.validate();
  const PtdfMatrix ptdf = build_ptdf(problem.grid);
  const AssembledModel model = assemble(problem, ptdf, options);

  DispatchResult result;
  result.solution = solve(model.program, solver_options);
  result.variable_count = model.program.variable_count();
  result.constraint_count = model.constraint_count();
  result.schedule = extract_schedule(problem, model, result.solution.x);
  if (result.solution.status == SolveStatus::Optimal) {
    const auto& rows = model.program.rows();
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].sense == RowSense::Equal) continue;
      const double slack = rows[r].bound - rows[r].activity(result.solution.x);
      const double multiplier = result.solution.multipliers.rows[static_cast<Eigen::Index>(r)];
      if (slack <= 1e-5 * (1.0 + std::abs(rows[r].bound)) || multiplier > 1e-6) {
        result.binding_rows.emplace_back(model.row_info[r], rows[r].name);
      }
    }
  }
  return result;
}

}  // namespace ccrtd
