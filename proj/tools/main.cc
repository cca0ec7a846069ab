#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.h"
#include "obsplan/io.h"

namespace {

using obsplan::cli::kInputError;

struct CommonFlags {
  std::string scenario_path;
  std::optional<std::string> scheme;
  std::optional<int> n_grid;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<double> eps_singular;
  std::optional<double> grad_tol;
  int threads = 0;
  bool plots = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool scenario_required) {
  auto* opt = cmd->add_option("--scenario", f.scenario_path,
                              "scenario file (key = value lines)");
  if (scenario_required) opt->required();
  cmd->add_option("--scheme", f.scheme, "euler or heun")
      ->check(CLI::IsMember({"euler", "heun"}));
  cmd->add_option("--n-grid", f.n_grid, "number of control intervals")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--eps-singular", f.eps_singular,
                  "relative switching-function threshold for singular arcs")
      ->check(CLI::PositiveNumber);
}

void add_solver(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--seed", f.seed, "multistart random seed");
  cmd->add_option("--grad-tol", f.grad_tol,
                  "projected-gradient tolerance, scaled by 1 + |objective|")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--threads", f.threads, "concurrent solves (0: all cores)");
  cmd->add_flag("--plots", f.plots, "also write course and switching plots");
}

obsplan::ScenarioFile load_scenario(const CommonFlags& f) {
  if (f.scenario_path.empty()) {
    return {obsplan::cli::example_scenario(), obsplan::Scheme::kHeun};
  }
  std::ifstream in(f.scenario_path);
  if (!in) throw obsplan::ParseError("cannot open " + f.scenario_path);
  std::stringstream text;
  text << in.rdbuf();
  return obsplan::parse_scenario(text.str());
}

obsplan::cli::RunManifest manifest(const CommonFlags& f) {
  const obsplan::ScenarioFile file = load_scenario(f);
  obsplan::cli::RunManifest m;
  m.scenario = file.scenario;
  m.scheme = f.scheme ? obsplan::parse_scheme(*f.scheme) : file.scheme;
  if (f.n_grid) m.scenario.n_grid = *f.n_grid;
  if (f.seed) m.options.seed = *f.seed;
  if (f.eps_singular) m.tolerances.eps_singular = *f.eps_singular;
  m.options.threads = f.threads;
  m.out_dir = f.out;
  m.artifacts.series_plots = f.plots;
  return m;
}

void apply_grad_tol(obsplan::cli::RunManifest& m, const CommonFlags& f) {
  if (f.grad_tol) {
    m.options.grad_tol = *f.grad_tol;
  } else if (m.scenario.kind == obsplan::ProblemKind::kFreeCourse) {
    m.options.grad_tol = obsplan::cli::kFreeCourseGradTol;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Observer paths that maximize bearings-only Fisher information"};
  app.require_subcommand(1);

  CommonFlags solve_f;
  auto* solve = app.add_subcommand("solve", "multistart solve and verify");
  add_common(solve, solve_f, true);
  add_solver(solve, solve_f);

  CommonFlags verify_f;
  std::string trajectory_path;
  auto* verify = app.add_subcommand(
      "verify", "check the optimality conditions on a stored trajectory");
  add_common(verify, verify_f, true);
  verify->add_option("trajectory", trajectory_path, "trajectory.csv")
      ->required();

  CommonFlags table_f;
  std::vector<double> horizons = {50, 80, 100, 120, 140, 150, 155, 160};
  auto* table = app.add_subcommand(
      "table1", "global and local objective values over a list of horizons");
  add_common(table, table_f, false);
  add_solver(table, table_f);
  table->add_option("--tf", horizons, "horizons [s]")->expected(0, -1);

  CommonFlags sweep_f;
  std::vector<double> ratios = {0.1, 0.2, 0.4, 0.6, 0.8, 0.9, 0.95};
  auto* sweep = app.add_subcommand(
      "sweep-p1", "free-course solutions for K = v t_f / r0");
  add_common(sweep, sweep_f, false);
  add_solver(sweep, sweep_f);
  sweep->add_option("--k", ratios, "K values in (0, 1)")->expected(0, -1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  try {
    if (*solve) {
      auto m = manifest(solve_f);
      apply_grad_tol(m, solve_f);
      return obsplan::cli::cmd_solve(m, std::cout, std::cerr);
    }
    if (*verify) {
      const auto m = manifest(verify_f);
      return obsplan::cli::cmd_verify(m.scenario, m.scheme, trajectory_path,
                                      m.tolerances, std::cout, std::cerr);
    }
    if (*table) {
      auto m = manifest(table_f);
      apply_grad_tol(m, table_f);
      return obsplan::cli::cmd_table1(m, horizons, std::cout, std::cerr);
    }
    auto m = manifest(sweep_f);
    m.scenario.kind = obsplan::ProblemKind::kFreeCourse;
    apply_grad_tol(m, sweep_f);
    return obsplan::cli::cmd_sweep_p1(m, ratios, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
}
