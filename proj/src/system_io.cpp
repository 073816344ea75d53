#include "ccrtd/system_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ccrtd/errors.hpp"

namespace ccrtd {

namespace {

using nlohmann::json;

// A JSON value together with its path, for diagnostics.
class Node {
 public:
  Node(const json& value, std::string path) : value_(value), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return value_; }
  bool has(const std::string& key) const { return value_.contains(key) && !value_.at(key).is_null(); }

  Node operator[](const std::string& key) const {
    require_object();
    if (!value_.contains(key)) throw SchemaError(path_ + "." + key, "required field is missing");
    return {value_.at(key), path_ + "." + key};
  }

  Node operator[](std::size_t i) const { return {value_.at(i), path_ + "[" + std::to_string(i) + "]"}; }

  std::size_t size() const {
    if (!value_.is_array()) throw SchemaError(path_, "expected an array");
    return value_.size();
  }

  double number() const {
    if (!value_.is_number()) throw SchemaError(path_, "expected a number");
    const double v = value_.get<double>();
    if (!std::isfinite(v)) throw SchemaError(path_, "expected a finite number");
    return v;
  }

  double number(const std::string& key, double fallback) const { return has(key) ? (*this)[key].number() : fallback; }

  int integer() const {
    if (!value_.is_number_integer()) throw SchemaError(path_, "expected an integer");
    return value_.get<int>();
  }

  std::string string() const {
    if (!value_.is_string()) throw SchemaError(path_, "expected a string");
    return value_.get<std::string>();
  }

  Eigen::VectorXd vector(std::size_t expected) const {
    if (size() != expected) {
      throw SchemaError(path_, "expected " + std::to_string(expected) + " entries, found " + std::to_string(size()));
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(expected));
    for (std::size_t i = 0; i < expected; ++i) out[static_cast<Eigen::Index>(i)] = (*this)[i].number();
    return out;
  }

  void require_object() const {
    if (!value_.is_object()) throw SchemaError(path_, "expected an object");
  }

  void allow_only(std::initializer_list<const char*> keys) const {
    require_object();
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, _] : value_.items()) {
      if (!allowed.count(key)) throw SchemaError(path_ + "." + key, "unknown field");
    }
  }

 private:
  const json& value_;
  std::string path_;
};

GridModel parse_grid(const Node& node) {
  node.allow_only({"buses", "slack", "lines"});
  GridModel grid;
  grid.bus_count = node["buses"].integer();
  if (grid.bus_count < 1) throw SchemaError(node.path() + ".buses", "must be at least 1");
  grid.slack_bus = node.has("slack") ? node["slack"].integer() : 0;
  if (grid.slack_bus < 0 || grid.slack_bus >= grid.bus_count) {
    throw SchemaError(node.path() + ".slack", "bus index out of range");
  }
  const Node lines = node["lines"];
  for (std::size_t l = 0; l < lines.size(); ++l) {
    const Node ln = lines[l];
    ln.allow_only({"name", "from", "to", "reactance", "limit"});
    Line line;
    line.name = ln.has("name") ? ln["name"].string() : "L" + std::to_string(l + 1);
    line.from_bus = ln["from"].integer();
    line.to_bus = ln["to"].integer();
    for (const auto* key : {"from", "to"}) {
      const int b = ln[key].integer();
      if (b < 0 || b >= grid.bus_count) throw SchemaError(ln.path() + "." + key, "bus index out of range");
    }
    line.reactance = ln["reactance"].number();
    if (!(line.reactance > 0.0)) throw SchemaError(ln.path() + ".reactance", "must be positive");
    line.limit = ln.number("limit", kUnlimited);
    if (!(line.limit > 0.0)) throw SchemaError(ln.path() + ".limit", "must be positive");
    grid.lines.push_back(std::move(line));
  }
  return grid;
}

void parse_generator(const Node& node, int buses, double minutes, Generator& g) {
  g.name = node["name"].string();
  g.bus = node["bus"].integer();
  if (g.bus < 0 || g.bus >= buses) throw SchemaError(node.path() + ".bus", "bus index out of range");
  g.p_min = node["p_min"].number();
  g.p_max = node["p_max"].number();
  if (node.has("ramp_rate")) {
    if (node.has("ramp_up") || node.has("ramp_down")) {
      throw SchemaError(node.path() + ".ramp_rate", "give either ramp_rate or ramp_up/ramp_down");
    }
    // Fraction of capacity per period.
    const double r = node["ramp_rate"].number();
    if (r < 0.0) throw SchemaError(node.path() + ".ramp_rate", "must be nonnegative");
    g.ramp_up = g.ramp_down = r * g.p_max / minutes;
  } else {
    g.ramp_up = node.number("ramp_up", kUnlimited);
    g.ramp_down = node.number("ramp_down", kUnlimited);
    if (g.ramp_up < 0.0) throw SchemaError(node.path() + ".ramp_up", "must be nonnegative");
    if (g.ramp_down < 0.0) throw SchemaError(node.path() + ".ramp_down", "must be nonnegative");
  }
  const Node cost = node["cost"];
  cost.allow_only({"a", "b", "c"});
  g.cost = {cost.number("a", 0.0), cost.number("b", 0.0), cost.number("c", 0.0)};
  if (g.cost.a < 0.0) throw SchemaError(cost.path() + ".a", "quadratic coefficient must be nonnegative");
}

WindForecastPeriod parse_forecast(const Node& node, const std::vector<double>& capacities) {
  node.allow_only({"mu", "sigma", "caps", "W_bar"});
  const std::size_t k = capacities.size();
  Eigen::VectorXd mu = node["mu"].vector(k);
  const Node sigma_node = node["sigma"];
  if (sigma_node.size() != k) throw SchemaError(sigma_node.path(), "expected " + std::to_string(k) + " rows");
  Eigen::MatrixXd sigma(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t r = 0; r < k; ++r) sigma.row(static_cast<Eigen::Index>(r)) = sigma_node[r].vector(k).transpose();
  Eigen::VectorXd caps = node.has("caps") ? node["caps"].vector(k)
                                          : Eigen::Map<const Eigen::VectorXd>(capacities.data(),
                                                                              static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    const auto c = caps[static_cast<Eigen::Index>(i)];
    if (c < 0.0 || c > capacities[i]) {
      throw SchemaError(node.path() + ".caps[" + std::to_string(i) + "]", "must lie in [0, farm capacity]");
    }
  }
  const double total = node.has("W_bar") ? node["W_bar"].number() : caps.sum();
  if (!(total > 0.0)) throw SchemaError(node.path() + ".W_bar", "must be positive");
  try {
    return {MultivariateCauchy(std::move(mu), std::move(sigma)), std::move(caps), total};
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    throw SchemaError(sigma_node.path(), e.what());
  }
}

Eigen::VectorXd parse_series(const Node& node, std::size_t count) {
  Eigen::VectorXd out = node.vector(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (out[static_cast<Eigen::Index>(i)] < 0.0) {
      throw SchemaError(node.path() + "[" + std::to_string(i) + "]", "must be nonnegative");
    }
  }
  return out;
}

std::string format_double(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

double parse_double(const std::string& text, const std::string& source, std::size_t line) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  while (first < last && std::isspace(static_cast<unsigned char>(*first))) ++first;
  while (last > first && std::isspace(static_cast<unsigned char>(last[-1]))) --last;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last) {
    throw ParseError(source, line, "not a number: '" + text + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream s(line);
  while (std::getline(s, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

DispatchProblem SystemData::window(int start, const Eigen::VectorXd* initial) const {
  const int t_count = base.periods();
  if (start < 0 || start + t_count > supplied_periods()) {
    throw InvalidInputError("window " + std::to_string(start) + " exceeds the supplied periods");
  }
  DispatchProblem p = base;
  p.loads = loads.middleRows(start, t_count);
  p.forecasts.assign(forecasts.begin() + start, forecasts.begin() + start + t_count);
  if (reserve_up.size()) p.reserve_up = reserve_up.segment(start, t_count);
  if (reserve_down.size()) p.reserve_down = reserve_down.segment(start, t_count);
  if (initial) {
    const auto units = static_cast<Eigen::Index>(p.non_agc.size() + p.agc.size());
    if (initial->size() != units) throw InvalidInputError("initial outputs do not match the unit count");
    Eigen::Index i = 0;
    for (auto& g : p.non_agc) g.initial_output = (*initial)[i++];
    for (auto& g : p.agc) g.initial_output = (*initial)[i++];
  }
  return p;
}

SystemData parse_system(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError("$", std::string("malformed JSON: ") + e.what());
  }
  const Node root(doc, "$");
  root.allow_only({"name", "description", "grid", "horizon", "units", "prices", "wind_farms", "loads", "forecasts",
                   "risk", "reserves"});

  SystemData data;
  DispatchProblem& p = data.base;
  p.grid = parse_grid(root["grid"]);
  const int buses = p.grid.bus_count;

  const Node horizon = root["horizon"];
  horizon.allow_only({"T", "dT_minutes", "initial_outputs"});
  p.horizon.periods = horizon["T"].integer();
  if (p.horizon.periods < 1) throw SchemaError(horizon.path() + ".T", "must be at least 1");
  p.horizon.minutes = horizon["dT_minutes"].number();
  if (!(p.horizon.minutes > 0.0)) throw SchemaError(horizon.path() + ".dT_minutes", "must be positive");

  const json no_prices = json::object();
  const Node prices = root.has("prices") ? root["prices"] : Node(no_prices, "$.prices");
  if (root.has("prices")) prices.allow_only({"gamma_up", "gamma_down"});

  const Node units = root["units"];
  units.allow_only({"non_agc", "agc", "participation"});
  std::set<std::string> names;
  auto unique = [&](const Node& unit, const std::string& name) {
    if (!names.insert(name).second) throw SchemaError(unit.path() + ".name", "duplicate unit name '" + name + "'");
  };
  if (units.has("non_agc")) {
    const Node list = units["non_agc"];
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Node u = list[i];
      u.allow_only({"name", "bus", "p_min", "p_max", "ramp_up", "ramp_down", "ramp_rate", "cost"});
      NonAgcUnit g;
      parse_generator(u, buses, p.horizon.minutes, g);
      unique(u, g.name);
      p.non_agc.push_back(std::move(g));
    }
  }
  bool proportional = false;
  if (units.has("participation")) {
    if (units["participation"].string() != "proportional") {
      throw SchemaError(units.path() + ".participation", "only \"proportional\" is supported");
    }
    proportional = true;
  }
  const Node agc_list = units["agc"];
  if (agc_list.size() == 0) throw SchemaError(agc_list.path(), "at least one AGC unit is required");
  for (std::size_t j = 0; j < agc_list.size(); ++j) {
    const Node u = agc_list[j];
    u.allow_only({"name", "bus", "p_min", "p_max", "ramp_up", "ramp_down", "ramp_rate", "cost", "alpha", "gamma_up",
                  "gamma_down"});
    AgcUnit g;
    parse_generator(u, buses, p.horizon.minutes, g);
    unique(u, g.name);
    g.gamma_up = u.has("gamma_up") ? u["gamma_up"].number() : prices["gamma_up"].number();
    g.gamma_down = u.has("gamma_down") ? u["gamma_down"].number() : prices["gamma_down"].number();
    if (g.gamma_up < 0.0 || g.gamma_down < 0.0) throw SchemaError(u.path(), "regulation prices must be nonnegative");
    if (proportional && u.has("alpha")) {
      throw SchemaError(u.path() + ".alpha", "conflicts with proportional participation");
    }
    if (!proportional) {
      g.participation = u["alpha"].number();
      if (g.participation < 0.0 || g.participation > 1.0) throw SchemaError(u.path() + ".alpha", "must lie in [0, 1]");
    }
    p.agc.push_back(std::move(g));
  }
  if (proportional) {
    assign_proportional_participation(p.agc);
  } else {
    double sum = 0.0;
    for (const auto& g : p.agc) sum += g.participation;
    if (std::abs(sum - 1.0) > 1e-9) throw SchemaError(agc_list.path(), "alpha values must sum to 1");
  }

  {
    const json empty = json::object();
    const Node init = horizon.has("initial_outputs") ? horizon["initial_outputs"] : Node(empty, "");
    std::map<std::string, double> values;
    if (horizon.has("initial_outputs")) {
      init.require_object();
      for (const auto& [key, value] : init.raw().items()) {
        if (!names.count(key)) throw SchemaError(init.path() + "." + key, "unknown unit");
        values[key] = Node(value, init.path() + "." + key).number();
      }
    }
    auto assign = [&](Generator& g) {
      const auto it = values.find(g.name);
      if (it != values.end()) {
        g.initial_output = it->second;
      } else if (std::isfinite(g.ramp_up) || std::isfinite(g.ramp_down)) {
        throw SchemaError(horizon.path() + ".initial_outputs." + g.name, "required for a ramp-limited unit");
      }
    };
    for (auto& g : p.non_agc) assign(g);
    for (auto& g : p.agc) assign(g);
  }

  const Node farms = root["wind_farms"];
  if (farms.size() == 0) throw SchemaError(farms.path(), "at least one wind farm is required");
  std::vector<double> capacities;
  for (std::size_t k = 0; k < farms.size(); ++k) {
    const Node f = farms[k];
    f.allow_only({"name", "bus", "capacity"});
    WindFarm farm{f["name"].string(), f["bus"].integer()};
    if (farm.bus < 0 || farm.bus >= buses) throw SchemaError(f.path() + ".bus", "bus index out of range");
    const double cap = f["capacity"].number();
    if (!(cap > 0.0)) throw SchemaError(f.path() + ".capacity", "must be positive");
    capacities.push_back(cap);
    p.wind_farms.push_back(std::move(farm));
  }

  const Node forecasts = root["forecasts"];
  const std::size_t supplied = forecasts.size();
  if (supplied < static_cast<std::size_t>(p.horizon.periods)) {
    throw SchemaError(forecasts.path(), "fewer forecasts than horizon periods");
  }
  for (std::size_t t = 0; t < supplied; ++t) data.forecasts.push_back(parse_forecast(forecasts[t], capacities));

  const Node loads = root["loads"];
  if (loads.size() != supplied) throw SchemaError(loads.path(), "one load row per forecast period is required");
  data.loads.resize(static_cast<Eigen::Index>(supplied), buses);
  for (std::size_t t = 0; t < supplied; ++t) {
    data.loads.row(static_cast<Eigen::Index>(t)) =
        parse_series(loads[t], static_cast<std::size_t>(buses)).transpose();
  }

  const Node risk = root["risk"];
  risk.allow_only({"delta", "beta", "epsilon", "eta"});
  p.risk = {risk["delta"].number(), risk["beta"].number(), risk["epsilon"].number(), risk["eta"].number()};
  for (const auto* key : {"delta", "beta", "epsilon", "eta"}) {
    const double v = risk[key].number();
    if (!(v > 0.0 && v < 0.5)) throw SchemaError(risk.path() + "." + key, "violation probability must lie in (0, 0.5)");
  }

  if (root.has("reserves")) {
    const Node reserves = root["reserves"];
    reserves.allow_only({"R_plus", "R_minus"});
    if (reserves.has("R_plus")) data.reserve_up = parse_series(reserves["R_plus"], supplied);
    if (reserves.has("R_minus")) data.reserve_down = parse_series(reserves["R_minus"], supplied);
  }

  p = data.window(0);
  p.validate();
  return data;
}

SystemData load_system(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open system file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_system(text.str());
}

void write_schedule_csv(std::ostream& out, const DispatchProblem& problem, const DispatchSchedule& schedule) {
  out << "period,kind,device,mw\n";
  for (int t = 0; t < problem.periods(); ++t) {
    for (std::size_t i = 0; i < problem.non_agc.size(); ++i) {
      out << t + 1 << ",non_agc," << problem.non_agc[i].name << ','
          << format_double(schedule.non_agc(static_cast<Eigen::Index>(i), t)) << "\n";
    }
    for (std::size_t j = 0; j < problem.agc.size(); ++j) {
      out << t + 1 << ",agc," << problem.agc[j].name << ','
          << format_double(schedule.agc(static_cast<Eigen::Index>(j), t)) << "\n";
    }
    for (std::size_t k = 0; k < problem.wind_farms.size(); ++k) {
      out << t + 1 << ",wind," << problem.wind_farms[k].name << ','
          << format_double(schedule.wind(static_cast<Eigen::Index>(k), t)) << "\n";
    }
    out << t + 1 << ",wind_total,," << format_double(schedule.wind_total[t]) << "\n";
  }
}

DispatchSchedule read_schedule_csv(std::istream& in, const DispatchProblem& problem, const std::string& source) {
  const int t_count = problem.periods();
  DispatchSchedule s;
  s.non_agc = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(problem.non_agc.size()), t_count, NAN);
  s.agc = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(problem.agc.size()), t_count, NAN);
  s.wind = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(problem.wind_farms.size()), t_count, NAN);
  s.wind_total = Eigen::VectorXd::Constant(t_count, NAN);

  auto find = [](const auto& list, const std::string& name) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i].name == name) return static_cast<Eigen::Index>(i);
    }
    return Eigen::Index{-1};
  };

  std::string line;
  std::size_t number = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "period,kind,device,mw") throw ParseError(source, number, "expected header period,kind,device,mw");
      header = true;
      continue;
    }
    const auto fields = split(line);
    if (fields.size() != 4) throw ParseError(source, number, "expected 4 fields");
    const double period = parse_double(fields[0], source, number);
    const int t = static_cast<int>(period) - 1;
    if (period != std::floor(period) || t < 0 || t >= t_count) throw ParseError(source, number, "period out of range");
    const double mw = parse_double(fields[3], source, number);
    const std::string& kind = fields[1];
    const std::string& device = fields[2];
    Eigen::Index row = -1;
    double* target = nullptr;
    if (kind == "non_agc" && (row = find(problem.non_agc, device)) >= 0) {
      target = &s.non_agc(row, t);
    } else if (kind == "agc" && (row = find(problem.agc, device)) >= 0) {
      target = &s.agc(row, t);
    } else if (kind == "wind" && (row = find(problem.wind_farms, device)) >= 0) {
      target = &s.wind(row, t);
    } else if (kind == "wind_total" && device.empty()) {
      target = &s.wind_total[t];
    } else {
      throw ParseError(source, number, "unknown device '" + kind + "," + device + "'");
    }
    if (!std::isnan(*target)) throw ParseError(source, number, "duplicate entry");
    *target = mw;
  }
  if (!header) throw ParseError(source, number, "empty schedule");
  if (s.non_agc.hasNaN() || s.agc.hasNaN() || s.wind.hasNaN() || s.wind_total.hasNaN()) {
    throw InvalidInputError(source + ": schedule does not cover every device and period");
  }
  evaluate_costs(problem, s);
  return s;
}

Eigen::MatrixXd read_matrix_csv(std::istream& in, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t number = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') continue;
    const auto fields = split(line);
    std::vector<double> values;
    try {
      for (const auto& f : fields) values.push_back(parse_double(f, source, number));
    } catch (const ParseError&) {
      if (first) {
        first = false;
        continue;
      }
      throw;
    }
    first = false;
    if (!rows.empty() && values.size() != rows.front().size()) {
      throw ParseError(source, number,
                       "expected " + std::to_string(rows.front().size()) + " columns, found " +
                           std::to_string(values.size()));
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ParseError(source, number, "no numeric rows");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return out;
}

std::string forecast_json(const FitResult& fit) {
  const auto& d = fit.distribution;
  json doc;
  doc["mu"] = std::vector<double>(d.location().data(), d.location().data() + d.dimension());
  json sigma = json::array();
  for (Eigen::Index r = 0; r < d.dimension(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(d.dimension()));
    for (Eigen::Index c = 0; c < d.dimension(); ++c) row[static_cast<std::size_t>(c)] = d.scale_matrix()(r, c);
    sigma.push_back(row);
  }
  doc["sigma"] = sigma;
  doc["log_likelihood"] = fit.log_likelihood;
  doc["iterations"] = fit.iterations;
  doc["converged"] = fit.converged;
  return doc.dump(2) + "\n";
}

void write_ptdf_csv(std::ostream& out, const PtdfMatrix& ptdf, const GridModel& grid) {
  out << "line";
  for (Eigen::Index b = 0; b < ptdf.bus_count(); ++b) out << ",bus" << b;
  out << "\n" << std::setprecision(12);
  for (Eigen::Index l = 0; l < ptdf.line_count(); ++l) {
    const auto& name = grid.lines[static_cast<std::size_t>(l)].name;
    out << (name.empty() ? "L" + std::to_string(l + 1) : name);
    for (Eigen::Index b = 0; b < ptdf.bus_count(); ++b) out << ',' << ptdf(l, b);
    out << "\n";
  }
}

}  // namespace ccrtd
