#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ccrtd/cauchy.hpp"
#include "ccrtd/dispatch_model.hpp"
#include "ccrtd/errors.hpp"
#include "ccrtd/network.hpp"
#include "ccrtd/rolling.hpp"
#include "ccrtd/solver.hpp"
#include "ccrtd/system_io.hpp"
#include "ccrtd/validation.hpp"

namespace fs = std::filesystem;
using namespace ccrtd;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kInfeasible = 2;
constexpr int kValidationFailed = 3;
constexpr int kInputError = 4;

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot write " + path.string());
  return out;
}

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 1; i < argc; ++i) s += (i > 1 ? " " : "") + std::string(argv[i]);
  return s;
}

struct DispatchArgs {
  std::string system;
  std::string out = ".";
  double risk_scale = 1.0;
  bool no_aprr = false;
  bool no_affine_lines = false;
  bool dump_model = false;
  bool verbose = false;
};

int run_dispatch(const DispatchArgs& args, const std::string& command_line) {
  const auto start = std::chrono::steady_clock::now();
  const SystemData data = load_system(args.system);
  DispatchProblem problem = data.window(0);
  if (!(args.risk_scale > 0.0)) throw InvalidInputError("--risk-scale must be positive");
  problem.risk.delta *= args.risk_scale;
  problem.risk.beta *= args.risk_scale;
  problem.risk.epsilon *= args.risk_scale;
  problem.risk.eta *= args.risk_scale;
  problem.validate();

  AssemblyOptions options;
  options.aprr = !args.no_aprr;
  options.affine_lines = !args.no_affine_lines;
  SolverOptions solver_options;
  solver_options.verbose = args.verbose;
  solver_options.log = &std::cerr;

  const fs::path out_dir(args.out);
  fs::create_directories(out_dir);
  if (args.dump_model) {
    auto dump = open_output(out_dir / "model.txt");
    write_model_dump(dump, assemble(problem, build_ptdf(problem.grid), options));
  }
  const DispatchResult result = dispatch(problem, options, solver_options);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto& sol = result.solution;

  {
    auto report = open_output(out_dir / "report.csv");
    report << std::setprecision(12) << "key,value\n"
           << "command,\"" << command_line << "\"\n"
           << "system," << args.system << "\n"
           << "status," << to_string(sol.status) << "\n"
           << "objective," << result.schedule.objective() << "\n"
           << "generation_cost," << result.schedule.generation_cost << "\n"
           << "corrective_cost," << result.schedule.corrective_cost << "\n"
           << "variables," << result.variable_count << "\n"
           << "constraints," << result.constraint_count << "\n"
           << "iterations," << sol.iterations << "\n"
           << "stationarity," << sol.residuals.stationarity << "\n"
           << "primal_feasibility," << sol.residuals.primal_feasibility << "\n"
           << "complementarity," << sol.residuals.complementarity << "\n"
           << "wall_time_s," << seconds << "\n";
    for (const auto& [info, name] : result.binding_rows) report << "binding," << name << "\n";
  }

  if (sol.status == SolveStatus::Infeasible) {
    std::cerr << "infeasible; rows in conflict:\n";
    for (const auto& row : sol.violated_rows) std::cerr << "  " << row << "\n";
    return kInfeasible;
  }
  if (sol.status != SolveStatus::Optimal) {
    std::cerr << "solver stopped at the iteration limit\n";
    return kFailure;
  }
  auto schedule = open_output(out_dir / "schedule.csv");
  write_schedule_csv(schedule, problem, result.schedule);
  std::cout << std::fixed << std::setprecision(2) << "optimal: objective " << result.schedule.objective()
            << " (generation " << result.schedule.generation_cost << ", regulation "
            << result.schedule.corrective_cost << "), " << result.variable_count << " variables, "
            << result.constraint_count << " constraints, " << result.binding_rows.size() << " binding rows, "
            << std::setprecision(3) << seconds << " s\n";
  return kOk;
}

struct ValidateArgs {
  std::string system;
  std::string schedule;
  long samples = 10000;
  std::uint64_t seed = 1;
  bool clip = false;
  std::string out = "security_report.csv";
  int workers = 1;
};

int run_validate(const ValidateArgs& args, const std::string& command_line) {
  const SystemData data = load_system(args.system);
  const DispatchProblem problem = data.window(0);
  std::ifstream in(args.schedule);
  if (!in) throw InvalidInputError("cannot open schedule " + args.schedule);
  const DispatchSchedule schedule = read_schedule_csv(in, problem, args.schedule);
  if (args.samples < 1) throw InvalidInputError("--samples must be positive");

  const ScenarioSet scenarios = generate_scenarios(problem, args.samples, args.seed, args.clip);
  ValidationOptions options;
  options.workers = args.workers;
  const SecurityReport report = validate_schedule(problem, schedule, scenarios, options);
  {
    auto out = open_output(args.out);
    out << "# " << command_line << "\n";
    write_report_csv(out, report);
  }
  write_report_text(std::cout, report);
  return report.passed() ? kOk : kValidationFailed;
}

int run_rolling_command(const std::string& system, int windows, const std::string& out_path, bool no_aprr,
                        bool no_affine_lines) {
  const SystemData data = load_system(system);
  AssemblyOptions options;
  options.aprr = !no_aprr;
  options.affine_lines = !no_affine_lines;
  const RollingResult result = run_rolling(data, windows, options);
  {
    auto out = open_output(out_path);
    write_trajectory_csv(out, data.base, result);
  }
  if (result.failed_window >= 0) {
    std::cerr << "window " << result.failed_window + 1 << " ended with status " << to_string(result.status)
              << "; " << result.committed() << " periods committed\n";
    return result.status == SolveStatus::Infeasible ? kInfeasible : kFailure;
  }
  std::cout << "committed " << result.committed() << " periods to " << out_path << "\n";
  return kOk;
}

int run_fit(const std::string& data_path, const std::string& out_path) {
  std::ifstream in(data_path);
  if (!in) throw InvalidInputError("cannot open " + data_path);
  const Eigen::MatrixXd samples = read_matrix_csv(in, data_path);
  const FitResult fit = fit_mv_cauchy(samples);
  auto out = open_output(out_path);
  out << forecast_json(fit);
  std::cout << "fitted " << samples.cols() << "-variate Cauchy to " << samples.rows() << " samples in "
            << fit.iterations << " iterations" << (fit.converged ? "" : " (not converged)") << "\n";
  return kOk;
}

int run_ptdf(const std::string& system, const std::string& out_path) {
  const SystemData data = load_system(system);
  const PtdfMatrix ptdf = build_ptdf(data.base.grid);
  if (out_path.empty()) {
    write_ptdf_csv(std::cout, ptdf, data.base.grid);
  } else {
    auto out = open_output(out_path);
    write_ptdf_csv(out, ptdf, data.base.grid);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chance-constrained real-time dispatch with Cauchy wind forecast errors"};
  app.require_subcommand(1);
  const std::string command_line = join_args(argc, argv);

  DispatchArgs dispatch_args;
  auto* dispatch_cmd = app.add_subcommand("dispatch", "Solve one dispatch horizon");
  dispatch_cmd->add_option("--system", dispatch_args.system, "System JSON file")->required();
  dispatch_cmd->add_option("--out", dispatch_args.out, "Output directory");
  dispatch_cmd->add_option("--risk-scale", dispatch_args.risk_scale, "Multiply every risk level");
  dispatch_cmd->add_flag("--no-aprr", dispatch_args.no_aprr, "Deterministic AGC ramp rows");
  dispatch_cmd->add_flag("--no-affine-lines", dispatch_args.no_affine_lines,
                         "Line rows without AGC participation terms");
  dispatch_cmd->add_flag("--dump-model", dispatch_args.dump_model, "Write model.txt");
  dispatch_cmd->add_flag("--verbose", dispatch_args.verbose, "Solver log on stderr");

  ValidateArgs validate_args;
  auto* validate_cmd = app.add_subcommand("validate", "Monte Carlo check of a schedule");
  validate_cmd->add_option("--system", validate_args.system, "System JSON file")->required();
  validate_cmd->add_option("--schedule", validate_args.schedule, "Schedule CSV")->required();
  validate_cmd->add_option("--samples", validate_args.samples, "Scenario count");
  validate_cmd->add_option("--seed", validate_args.seed, "Random seed");
  validate_cmd->add_flag("--clip", validate_args.clip, "Clamp draws to [0, cap]");
  validate_cmd->add_option("--out", validate_args.out, "Report CSV");
  validate_cmd->add_option("--workers", validate_args.workers, "Worker threads");

  std::string rolling_system;
  int windows = 1;
  std::string rolling_out = "trajectory.csv";
  bool rolling_no_aprr = false;
  bool rolling_no_affine = false;
  auto* rolling_cmd = app.add_subcommand("rolling", "Rolling-horizon dispatch");
  rolling_cmd->add_option("--system", rolling_system, "System JSON file")->required();
  rolling_cmd->add_option("--windows", windows, "Number of windows")->required();
  rolling_cmd->add_option("--out", rolling_out, "Committed trajectory CSV");
  rolling_cmd->add_flag("--no-aprr", rolling_no_aprr, "Deterministic AGC ramp rows");
  rolling_cmd->add_flag("--no-affine-lines", rolling_no_affine, "Line rows without AGC participation terms");

  std::string fit_data;
  std::string fit_out = "forecast.json";
  auto* fit_cmd = app.add_subcommand("fit", "Fit a multivariate Cauchy to samples");
  fit_cmd->add_option("--data", fit_data, "CSV, one sample per row")->required();
  fit_cmd->add_option("--out", fit_out, "Forecast JSON");

  std::string ptdf_system;
  std::string ptdf_out;
  auto* ptdf_cmd = app.add_subcommand("ptdf", "Print the PTDF matrix as CSV");
  ptdf_cmd->add_option("--system", ptdf_system, "System JSON file")->required();
  ptdf_cmd->add_option("--out", ptdf_out, "CSV file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*dispatch_cmd) return run_dispatch(dispatch_args, command_line);
    if (*validate_cmd) return run_validate(validate_args, command_line);
    if (*rolling_cmd) return run_rolling_command(rolling_system, windows, rolling_out, rolling_no_aprr, rolling_no_affine);
    if (*fit_cmd) return run_fit(fit_data, fit_out);
    if (*ptdf_cmd) return run_ptdf(ptdf_system, ptdf_out);
  } catch (const ConvexityViolationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
