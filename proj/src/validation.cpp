#include "ccrtd/validation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <thread>

#include "ccrtd/errors.hpp"
#include "ccrtd/random.hpp"

namespace ccrtd {

namespace {

// Runs fn(begin, end) over fixed chunks of [0, n) and returns the partial
// results in chunk order, whatever the number of workers.
template <class Fn>
auto run_chunks(Eigen::Index n, const ValidationOptions& options, Fn fn) {
  using Partial = decltype(fn(Eigen::Index{0}, Eigen::Index{0}));
  const Eigen::Index chunk = std::max<Eigen::Index>(options.chunk, 1);
  const auto chunks = static_cast<std::size_t>((n + chunk - 1) / chunk);
  std::vector<Partial> partials(chunks);
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t c = first; c < chunks; c += stride) {
      const Eigen::Index begin = static_cast<Eigen::Index>(c) * chunk;
      partials[c] = fn(begin, std::min(n, begin + chunk));
    }
  };
  const auto workers = static_cast<std::size_t>(std::clamp<int>(options.workers, 1, 64));
  if (workers == 1 || chunks < 2) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    for (auto& t : pool) t.join();
  }
  return partials;
}

double binomial_se(double p, Eigen::Index n) {
  return n > 0 ? std::sqrt(p * (1.0 - p) / static_cast<double>(n)) : 0.0;
}

std::string label(const std::string& family, const std::string& element, int t) {
  std::string s = family + "[";
  if (!element.empty()) s += element + ",";
  return s + "t" + std::to_string(t + 1) + "]";
}

std::string line_name(const DispatchProblem& problem, int l) {
  const auto& name = problem.grid.lines[static_cast<std::size_t>(l)].name;
  return name.empty() ? "L" + std::to_string(l + 1) : name;
}

void check_dimensions(const DispatchProblem& problem, const DispatchSchedule& schedule,
                      const ScenarioSet& scenarios) {
  const auto t_count = problem.periods();
  if (schedule.agc.rows() != static_cast<Eigen::Index>(problem.agc.size()) ||
      schedule.non_agc.rows() != static_cast<Eigen::Index>(problem.non_agc.size()) ||
      schedule.agc.cols() != t_count || schedule.non_agc.cols() != t_count ||
      schedule.wind_total.size() != t_count) {
    throw InvalidInputError("schedule does not match the system dimensions");
  }
  if (scenarios.periods() != t_count) throw InvalidInputError("scenario set does not match the horizon");
  for (const auto& w : scenarios.wind) {
    if (w.cols() != static_cast<Eigen::Index>(problem.wind_farms.size())) {
      throw InvalidInputError("scenario set does not match the wind farm count");
    }
  }
}

// Line flows split into a schedule-only part and the sensitivities to
// realized wind: flow = base + farm . w~ - recourse * (W~ - w).
struct FlowModel {
  Eigen::MatrixXd base;   // lines x periods
  Eigen::MatrixXd farm;   // lines x farms
  Eigen::VectorXd recourse;

  FlowModel(const DispatchProblem& problem, const PtdfMatrix& ptdf, const DispatchSchedule& schedule) {
    const auto lines = ptdf.line_count();
    const int t_count = problem.periods();
    base = Eigen::MatrixXd::Zero(lines, t_count);
    farm.resize(lines, static_cast<Eigen::Index>(problem.wind_farms.size()));
    recourse = Eigen::VectorXd::Zero(lines);
    for (Eigen::Index l = 0; l < lines; ++l) {
      for (std::size_t k = 0; k < problem.wind_farms.size(); ++k) {
        farm(l, static_cast<Eigen::Index>(k)) = ptdf(l, problem.wind_farms[k].bus);
      }
      for (const auto& u : problem.agc) recourse[l] += ptdf(l, u.bus) * u.participation;
      for (int t = 0; t < t_count; ++t) {
        double f = 0.0;
        for (std::size_t i = 0; i < problem.non_agc.size(); ++i) {
          f += ptdf(l, problem.non_agc[i].bus) * schedule.non_agc(static_cast<Eigen::Index>(i), t);
        }
        for (std::size_t j = 0; j < problem.agc.size(); ++j) {
          f += ptdf(l, problem.agc[j].bus) * schedule.agc(static_cast<Eigen::Index>(j), t);
        }
        for (Eigen::Index d = 0; d < problem.loads.cols(); ++d) f -= ptdf(l, d) * problem.loads(t, d);
        base(l, t) = f;
      }
    }
  }

  double flow(Eigen::Index l, int t, const Eigen::Ref<const Eigen::RowVectorXd>& wind, double deviation) const {
    return base(l, t) + farm.row(l).dot(wind) - recourse[l] * deviation;
  }
};

}  // namespace

Eigen::MatrixXd ScenarioSet::totals() const {
  Eigen::MatrixXd out(size(), periods());
  for (int t = 0; t < periods(); ++t) out.col(t) = wind[static_cast<std::size_t>(t)].rowwise().sum();
  return out;
}

ScenarioSet generate_scenarios(const DispatchProblem& problem, Eigen::Index n, std::uint64_t seed, bool clip) {
  if (n < 1) throw InvalidInputError("scenario count must be at least 1");
  const int t_count = problem.periods();
  const auto k = static_cast<Eigen::Index>(problem.wind_farms.size());
  ScenarioSet set;
  set.seed = seed;
  set.clipped = clip;
  set.wind.assign(static_cast<std::size_t>(t_count), Eigen::MatrixXd(n, k));

  ValidationOptions options;
  run_chunks(n, options, [&](Eigen::Index begin, Eigen::Index end) {
    Eigen::VectorXd z(k);
    for (Eigen::Index i = begin; i < end; ++i) {
      RowStream rng(seed, static_cast<std::uint64_t>(i));
      const double g = std::abs(rng.normal());
      for (int t = 0; t < t_count; ++t) {
        const auto& f = problem.forecasts[static_cast<std::size_t>(t)];
        for (Eigen::Index c = 0; c < k; ++c) z[c] = rng.normal();
        Eigen::VectorXd x = f.dist.location() + f.dist.cholesky_factor() * z / g;
        if (clip) x = x.cwiseMax(0.0).cwiseMin(f.caps);
        set.wind[static_cast<std::size_t>(t)].row(i) = x.transpose();
      }
    }
    return 0;
  });
  return set;
}

Eigen::MatrixXd realize_agc(const Eigen::Ref<const Eigen::MatrixXd>& agc_schedule,
                            const Eigen::Ref<const Eigen::VectorXd>& scheduled_total,
                            const Eigen::Ref<const Eigen::VectorXd>& realized_total,
                            std::span<const AgcUnit> fleet) {
  if (agc_schedule.rows() != static_cast<Eigen::Index>(fleet.size()) ||
      agc_schedule.cols() != scheduled_total.size() || realized_total.size() != scheduled_total.size()) {
    throw InvalidInputError("realize_agc: dimension mismatch");
  }
  Eigen::MatrixXd out = agc_schedule;
  const Eigen::RowVectorXd deviation = (realized_total - scheduled_total).transpose();
  for (std::size_t j = 0; j < fleet.size(); ++j) {
    out.row(static_cast<Eigen::Index>(j)) -= fleet[j].participation * deviation;
  }
  return out;
}

std::vector<ViolationRate> chance_violation_rates(const DispatchProblem& problem, const PtdfMatrix& ptdf,
                                                  const DispatchSchedule& schedule, const ScenarioSet& scenarios,
                                                  const ValidationOptions& options) {
  check_dimensions(problem, schedule, scenarios);
  const int t_count = problem.periods();
  const double dt = problem.horizon.minutes;
  const FlowModel flows(problem, ptdf, schedule);
  const auto& risk = problem.risk;

  std::vector<ViolationRate> slots;
  auto add = [&](RowFamily family, std::string name, int t, int element, bool upper, double level) {
    slots.push_back({family, std::move(name), t, element, upper, 0.0, 0.0, level});
  };
  for (int t = 0; t < t_count; ++t) {
    for (std::size_t j = 0; j < problem.agc.size(); ++j) {
      const auto& u = problem.agc[j];
      if (u.participation <= 0.0) continue;
      const int e = static_cast<int>(j);
      add(RowFamily::AgcCapacity, label("agc_capacity_up", u.name, t), t, e, true, risk.delta);
      add(RowFamily::AgcCapacity, label("agc_capacity_down", u.name, t), t, e, false, risk.delta);
      if (t == 0) continue;
      if (std::isfinite(u.ramp_up)) add(RowFamily::AgcRamp, label("agc_ramp_up", u.name, t), t, e, true, risk.beta);
      if (std::isfinite(u.ramp_down)) {
        add(RowFamily::AgcRamp, label("agc_ramp_down", u.name, t), t, e, false, risk.beta);
      }
    }
    add(RowFamily::Reserve, label("reserve_up", "", t), t, -1, true, risk.epsilon);
    add(RowFamily::Reserve, label("reserve_down", "", t), t, -1, false, risk.epsilon);
    for (std::size_t l = 0; l < problem.grid.lines.size(); ++l) {
      if (!std::isfinite(problem.grid.lines[l].limit)) continue;
      const int e = static_cast<int>(l);
      add(RowFamily::Transmission, label("line_max", line_name(problem, e), t), t, e, true, risk.eta);
      add(RowFamily::Transmission, label("line_min", line_name(problem, e), t), t, e, false, risk.eta);
    }
  }

  double cap_max = 0.0;
  double cap_min = 0.0;
  for (const auto& u : problem.agc) {
    cap_max += u.p_max;
    cap_min += u.p_min;
  }
  const Eigen::MatrixXd totals = scenarios.totals();
  const Eigen::Index n = scenarios.size();

  auto partials = run_chunks(n, options, [&](Eigen::Index begin, Eigen::Index end) {
    std::vector<std::int64_t> counts(slots.size(), 0);
    Eigen::MatrixXd realized;
    for (Eigen::Index i = begin; i < end; ++i) {
      const Eigen::VectorXd total = totals.row(i).transpose();
      realized = realize_agc(schedule.agc, schedule.wind_total, total, problem.agc);
      for (std::size_t s = 0; s < slots.size(); ++s) {
        const auto& slot = slots[s];
        const int t = slot.period;
        bool violated = false;
        switch (slot.family) {
          case RowFamily::AgcCapacity: {
            const auto& u = problem.agc[static_cast<std::size_t>(slot.element)];
            const double p = realized(slot.element, t);
            violated = slot.upper ? p > u.p_max : p < u.p_min;
            break;
          }
          case RowFamily::AgcRamp: {
            const auto& u = problem.agc[static_cast<std::size_t>(slot.element)];
            const double change = realized(slot.element, t) - realized(slot.element, t - 1);
            violated = slot.upper ? change > u.ramp_up * dt : change < -u.ramp_down * dt;
            break;
          }
          case RowFamily::Reserve: {
            const double sum = realized.col(t).sum();
            if (slot.upper) {
              const double up = problem.reserve_up.size() ? problem.reserve_up[t] : 0.0;
              violated = cap_max - sum < up;
            } else {
              const double down = problem.reserve_down.size() ? problem.reserve_down[t] : 0.0;
              violated = sum - cap_min < down;
            }
            break;
          }
          case RowFamily::Transmission: {
            const double limit = problem.grid.lines[static_cast<std::size_t>(slot.element)].limit;
            const double f = flows.flow(slot.element, t, scenarios.wind[static_cast<std::size_t>(t)].row(i),
                                        total[t] - schedule.wind_total[t]);
            violated = slot.upper ? f > limit : f < -limit;
            break;
          }
          default:
            break;
        }
        counts[s] += violated;
      }
    }
    return counts;
  });

  std::vector<std::int64_t> counts(slots.size(), 0);
  for (const auto& part : partials) {
    for (std::size_t s = 0; s < counts.size(); ++s) counts[s] += part[s];
  }
  for (std::size_t s = 0; s < slots.size(); ++s) {
    slots[s].rate = static_cast<double>(counts[s]) / static_cast<double>(n);
    slots[s].standard_error = binomial_se(slots[s].rate, n);
  }
  return slots;
}

std::vector<double> ramping_security_index(const DispatchProblem& problem, const DispatchSchedule& schedule,
                                           const ScenarioSet& scenarios) {
  check_dimensions(problem, schedule, scenarios);
  const int t_count = problem.periods();
  if (t_count < 2) throw InvalidInputError("ramping index needs at least two periods");
  const double dt = problem.horizon.minutes;
  const Eigen::MatrixXd totals = scenarios.totals();
  const Eigen::Index n = scenarios.size();
  std::vector<std::int64_t> ok(static_cast<std::size_t>(t_count - 1), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::MatrixXd realized =
        realize_agc(schedule.agc, schedule.wind_total, totals.row(i).transpose(), problem.agc);
    for (int t = 1; t < t_count; ++t) {
      bool within = true;
      for (std::size_t j = 0; j < problem.agc.size() && within; ++j) {
        const auto& u = problem.agc[j];
        const auto r = static_cast<Eigen::Index>(j);
        const double change = realized(r, t) - realized(r, t - 1);
        within = !(change > u.ramp_up * dt) && !(change < -u.ramp_down * dt);
      }
      ok[static_cast<std::size_t>(t - 1)] += within;
    }
  }
  std::vector<double> index;
  for (auto c : ok) index.push_back(static_cast<double>(c) / static_cast<double>(n));
  return index;
}

LineSecurity transmission_security_index(const DispatchProblem& problem, const PtdfMatrix& ptdf,
                                         const DispatchSchedule& schedule, const ScenarioSet& scenarios,
                                         int line) {
  check_dimensions(problem, schedule, scenarios);
  if (line < 0 || line >= static_cast<int>(problem.grid.lines.size())) {
    throw InvalidInputError("unknown line " + std::to_string(line));
  }
  const int t_count = problem.periods();
  LineSecurity result{line, line_name(problem, line), 1.0, std::vector<double>(static_cast<std::size_t>(t_count), 1.0)};
  const double limit = problem.grid.lines[static_cast<std::size_t>(line)].limit;
  if (!std::isfinite(limit)) return result;

  const FlowModel flows(problem, ptdf, schedule);
  const Eigen::MatrixXd totals = scenarios.totals();
  const Eigen::Index n = scenarios.size();
  std::int64_t joint = 0;
  std::vector<std::int64_t> per(static_cast<std::size_t>(t_count), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    bool all = true;
    for (int t = 0; t < t_count; ++t) {
      const double f = flows.flow(line, t, scenarios.wind[static_cast<std::size_t>(t)].row(i),
                                  totals(i, t) - schedule.wind_total[t]);
      const bool within = std::abs(f) <= limit;
      per[static_cast<std::size_t>(t)] += within;
      all = all && within;
    }
    joint += all;
  }
  result.joint = static_cast<double>(joint) / static_cast<double>(n);
  for (int t = 0; t < t_count; ++t) {
    result.per_period[static_cast<std::size_t>(t)] =
        static_cast<double>(per[static_cast<std::size_t>(t)]) / static_cast<double>(n);
  }
  return result;
}

Estimate mc_corrective_cost(std::span<const AgcUnit> fleet, double scheduled, std::span<const double> realized,
                            double total_cap) {
  if (realized.empty()) throw InvalidInputError("no realizations");
  double up = 0.0;
  double down = 0.0;
  for (const auto& u : fleet) {
    up += u.participation * u.gamma_up;
    down += u.participation * u.gamma_down;
  }
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double r : realized) {
    double cost = 0.0;
    if (r >= 0.0 && r <= total_cap) cost = r < scheduled ? up * (scheduled - r) : down * (r - scheduled);
    sum += cost;
    sum_sq += cost * cost;
  }
  const auto n = static_cast<double>(realized.size());
  const double mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - mean * mean) * n / std::max(n - 1.0, 1.0);
  return {mean, std::sqrt(var / n)};
}

Estimate mc_expected_cost(const DispatchProblem& problem, const DispatchSchedule& schedule,
                          const ScenarioSet& scenarios) {
  check_dimensions(problem, schedule, scenarios);
  const Eigen::MatrixXd totals = scenarios.totals();
  const Eigen::Index n = scenarios.size();
  Eigen::VectorXd per_scenario = Eigen::VectorXd::Zero(n);
  for (int t = 0; t < problem.periods(); ++t) {
    const double cap = problem.forecasts[static_cast<std::size_t>(t)].total_cap;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double r = totals(i, t);
      per_scenario[i] += problem.hours() *
                         mc_corrective_cost(problem.agc, schedule.wind_total[t], std::span<const double>(&r, 1), cap).mean;
    }
  }
  const double mean = per_scenario.mean();
  const double var = n > 1 ? (per_scenario.array() - mean).square().sum() / static_cast<double>(n - 1) : 0.0;
  return {schedule.generation_cost + mean, std::sqrt(var / static_cast<double>(n))};
}

double SecurityReport::tolerance(double risk) const { return 3.0 * binomial_se(risk, samples); }

std::vector<const ViolationRate*> SecurityReport::failures() const {
  std::vector<const ViolationRate*> out;
  for (const auto& r : rates) {
    if (r.rate > r.risk + tolerance(r.risk)) out.push_back(&r);
  }
  return out;
}

SecurityReport validate_schedule(const DispatchProblem& problem, const DispatchSchedule& schedule,
                                 const ScenarioSet& scenarios, const ValidationOptions& options) {
  const PtdfMatrix ptdf = build_ptdf(problem.grid);
  SecurityReport report;
  report.samples = scenarios.size();
  report.seed = scenarios.seed;
  report.clipped = scenarios.clipped;
  report.rates = chance_violation_rates(problem, ptdf, schedule, scenarios, options);
  if (problem.periods() >= 2) {
    report.ramp_index = ramping_security_index(problem, schedule, scenarios);
    double sum = 0.0;
    for (double v : report.ramp_index) sum += v;
    report.ramp_index_mean = sum / static_cast<double>(report.ramp_index.size());
  }
  for (std::size_t l = 0; l < problem.grid.lines.size(); ++l) {
    if (!std::isfinite(problem.grid.lines[l].limit)) continue;
    report.line_index.push_back(transmission_security_index(problem, ptdf, schedule, scenarios, static_cast<int>(l)));
  }
  report.cost = mc_expected_cost(problem, schedule, scenarios);
  return report;
}

void write_report_csv(std::ostream& out, const SecurityReport& report) {
  out << std::setprecision(10);
  out << "# samples=" << report.samples << " seed=" << report.seed
      << " mode=" << (report.clipped ? "clipped" : "unclipped") << "\n";
  out << "kind,name,family,period,rate,standard_error,risk,within\n";
  for (const auto& r : report.rates) {
    out << "rate," << r.name << ',' << to_string(r.family) << ',' << r.period + 1 << ',' << r.rate << ','
        << r.standard_error << ',' << r.risk << ',' << (r.rate <= r.risk + report.tolerance(r.risk) ? 1 : 0)
        << "\n";
  }
  for (std::size_t t = 0; t < report.ramp_index.size(); ++t) {
    out << "ramp_index,t" << t + 1 << "-t" << t + 2 << ",agc_ramp," << t + 2 << ',' << report.ramp_index[t]
        << ",,,\n";
  }
  out << "ramp_index,mean,agc_ramp,," << report.ramp_index_mean << ",,,\n";
  for (const auto& line : report.line_index) {
    for (std::size_t t = 0; t < line.per_period.size(); ++t) {
      out << "line_index," << line.name << ",transmission," << t + 1 << ',' << line.per_period[t] << ",,,\n";
    }
    out << "line_index," << line.name << ",transmission,all," << line.joint << ",,,\n";
  }
  out << "expected_cost,total,,," << report.cost.mean << ',' << report.cost.standard_error << ",,\n";
}

void write_report_text(std::ostream& out, const SecurityReport& report) {
  out << "Monte Carlo validation: " << report.samples << " scenarios, seed " << report.seed << ", "
      << (report.clipped ? "clipped" : "unclipped") << "\n";
  out << std::fixed << std::setprecision(4);
  for (RowFamily family : {RowFamily::AgcCapacity, RowFamily::AgcRamp, RowFamily::Reserve, RowFamily::Transmission}) {
    const ViolationRate* worst = nullptr;
    for (const auto& r : report.rates) {
      if (r.family == family && (!worst || r.rate > worst->rate)) worst = &r;
    }
    if (!worst) continue;
    out << "  " << std::left << std::setw(14) << to_string(family) << " max rate " << worst->rate << " ("
        << worst->name << ", risk " << worst->risk << ")\n";
  }
  out << "  ramping index mean " << report.ramp_index_mean << "\n";
  for (const auto& line : report.line_index) {
    out << "  line " << line.name << " index " << line.joint << "\n";
  }
  out << std::setprecision(2) << "  expected cost " << report.cost.mean << " +- " << report.cost.standard_error
      << "\n";
  const auto failures = report.failures();
  out << (failures.empty() ? "  all chance statements within tolerance\n" : "  VIOLATIONS:\n");
  out << std::setprecision(4);
  for (const auto* f : failures) out << "    " << f->name << " rate " << f->rate << " > " << f->risk << "\n";
}

}  // namespace ccrtd
