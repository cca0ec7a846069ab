#include "commands.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "obsplan/io.h"

namespace obsplan::cli {
namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  f << content;
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

template <typename Fn>
void emit(const fs::path& path, Fn&& fn) {
  std::ostringstream os;
  fn(os);
  write_file(path, os.str());
}

std::string branch_dir(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "branch_%02zu", i);
  return buf;
}

std::string ratio_dir(double k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "K_%.3g", k);
  return buf;
}

// Verification never throws: a path that grazes the target makes the costate
// equations undefined, which is reported as a failure.
VerificationReport safe_verify(const Solution& sol, const Scenario& scn,
                               Scheme scheme, const Tolerances& tol,
                               std::ostream& err) {
  try {
    return verify(sol, scn, scheme, tol);
  } catch (const std::exception& e) {
    err << "verification error: " << e.what() << '\n';
    return {};
  }
}

void write_branch(const fs::path& dir, const Solution& sol,
                  const VerificationReport& report, const RunManifest& m) {
  fs::create_directories(dir);
  const Artifacts& a = m.artifacts;
  if (a.trajectory) {
    emit(dir / "trajectory.csv", [&](std::ostream& os) {
      write_trajectory_csv(os, sol.trajectory, sol.control, m.scenario);
    });
  }
  if (a.costates || a.series_plots) {
    const CostateTrajectory ct =
        integrate_costates(sol.trajectory, m.scenario, m.scheme);
    if (a.costates) {
      emit(dir / "costates.csv",
           [&](std::ostream& os) { write_costate_csv(os, ct); });
    }
    if (a.series_plots) {
      emit(dir / "switching.svg", [&](std::ostream& os) {
        write_series_svg(os, ct.times, {ct.switching}, "lambda_theta");
      });
      std::vector<double> course;
      for (const State& s : sol.trajectory.states) {
        course.push_back(s.theta * 180.0 / std::numbers::pi);
      }
      emit(dir / "course.svg", [&](std::ostream& os) {
        write_series_svg(os, sol.trajectory.times, {course}, "course [deg]");
      });
    }
  }
  if (a.summary) {
    emit(dir / "summary.txt", [&](std::ostream& os) {
      write_summary(os, sol, report, m.scenario, m.scheme);
    });
  }
  if (a.path_plot) {
    emit(dir / "path.svg", [&](std::ostream& os) {
      write_path_svg(os, {&sol.trajectory});
    });
  }
}

// Best branch that is neither the global one nor a mirror image.
const Solution* local_branch(const std::vector<Solution>& branches) {
  for (std::size_t i = 1; i < branches.size(); ++i) {
    if (branches[i].mirror_of < 0) return &branches[i];
  }
  return nullptr;
}

}  // namespace

Scenario example_scenario() {
  Scenario scn;
  scn.kind = ProblemKind::kBoundedTurn;
  scn.v = 0.04;
  scn.turn_rate_max = 5.0 * std::numbers::pi / 180.0;
  scn.x0 = 5.0;
  scn.y0 = 0.0;
  scn.theta0 = 0.0;
  scn.t_f = 100.0;
  scn.n_grid = 1000;
  return scn;
}

void prepare(const RunManifest& m) {
  validate(m.scenario);
  validate(m.options);
  if (!m.artifacts.any()) throw ValidationError("no artifacts requested");
  std::error_code ec;
  fs::create_directories(m.out_dir, ec);
  if (ec || !fs::is_directory(m.out_dir)) {
    throw ValidationError("cannot create output directory " +
                          m.out_dir.string());
  }
  const fs::path probe = m.out_dir / ".write_probe";
  {
    std::ofstream f(probe);
    if (!f) {
      throw ValidationError("output directory not writable: " +
                            m.out_dir.string());
    }
  }
  fs::remove(probe, ec);
}

int cmd_solve(const RunManifest& m, std::ostream& out, std::ostream& err) {
  try {
    prepare(m);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  std::vector<Solution> branches;
  try {
    branches = multistart(m.scenario, m.options, m.scheme);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kSolverFailure;
  }

  std::vector<const Trajectory*> paths;
  for (std::size_t i = 0; i < branches.size(); ++i) {
    const Solution& sol = branches[i];
    const VerificationReport report =
        safe_verify(sol, m.scenario, m.scheme, m.tolerances, err);
    try {
      write_branch(m.out_dir / branch_dir(i), sol, report, m);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kInputError;
    }
    paths.push_back(&sol.trajectory);
    out << branch_dir(i) << "  objective " << format_sig4(sol.objective_reported)
        << "  " << report.arc_structure.label;
    if (sol.mirror_of >= 0) out << "  mirror of " << branch_dir(sol.mirror_of);
    out << "  verification " << (report.passed ? "pass" : "fail") << '\n';
  }
  if (m.artifacts.path_plot) {
    emit(m.out_dir / "paths.svg",
         [&](std::ostream& os) { write_path_svg(os, paths); });
  }
  return kOk;
}

int cmd_table1(const RunManifest& base, const std::vector<double>& horizons,
               std::ostream& out, std::ostream& err) {
  if (horizons.empty()) {
    err << "error: at least one horizon is required\n";
    return kInputError;
  }
  for (double t : horizons) {
    if (!(t > 0.0)) {
      err << "error: horizons must be positive\n";
      return kInputError;
    }
  }
  RunManifest m = base;
  try {
    prepare(m);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  std::ostringstream csv;
  csv << "t_f_s,global,local\n";
  out << "t_f [s]      global       local\n";
  bool failed = false;
  for (double t : horizons) {
    m.scenario.t_f = t;
    std::string global;
    std::string local;
    try {
      const std::vector<Solution> branches =
          multistart(m.scenario, m.options, m.scheme);
      global = format_sig4(branches.front().objective_reported);
      if (const Solution* s = local_branch(branches)) {
        local = format_sig4(s->objective_reported);
      }
    } catch (const std::exception& e) {
      err << "t_f = " << t << ": " << e.what() << '\n';
      global = "failed";
      failed = true;
    }
    char line[96];
    std::snprintf(line, sizeof line, "%7s  %10s  %10s\n",
                  format_sig4(t).c_str(), global.c_str(), local.c_str());
    out << line;
    csv << format_exact(t) << ',' << global << ',' << local << '\n';
  }
  write_file(m.out_dir / "table1.csv", csv.str());
  return failed ? kSolverFailure : kOk;
}

int cmd_sweep_p1(const RunManifest& base, const std::vector<double>& ratios,
                 std::ostream& out, std::ostream& err) {
  if (ratios.empty()) {
    err << "error: at least one K value is required\n";
    return kInputError;
  }
  for (double k : ratios) {
    if (!(k > 0.0 && k < 1.0)) {
      err << "error: K must lie in (0, 1), got " << k << '\n';
      return kInputError;
    }
  }
  RunManifest m = base;
  m.scenario.kind = ProblemKind::kFreeCourse;
  try {
    prepare(m);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  const double r0 = m.scenario.initial_range();
  std::vector<Solution> best;
  std::ostringstream csv;
  csv << "K,t_f_s,initial_course_deg,objective\n";
  out << "     K    t_f [s]  course(0) [deg]   objective\n";
  bool failed = false;
  for (double k : ratios) {
    RunManifest run = m;
    run.scenario.t_f = k * r0 / m.scenario.v;
    try {
      std::vector<Solution> branches =
          multistart(run.scenario, run.options, run.scheme);
      Solution& sol = branches.front();
      const VerificationReport report =
          safe_verify(sol, run.scenario, run.scheme, run.tolerances, err);
      write_branch(m.out_dir / ratio_dir(k), sol, report, run);
      const double course = sol.trajectory.states.front().theta * 180.0 /
                            std::numbers::pi;
      char line[96];
      std::snprintf(line, sizeof line, "%6.3g  %9.4g  %15.4f  %10s\n", k,
                    run.scenario.t_f, course,
                    format_sig4(sol.objective_reported).c_str());
      out << line;
      csv << format_exact(k) << ',' << format_exact(run.scenario.t_f) << ','
          << format_exact(course) << ',' << format_exact(sol.objective_reported)
          << '\n';
      best.push_back(std::move(sol));
    } catch (const std::exception& e) {
      err << "K = " << k << ": " << e.what() << '\n';
      failed = true;
    }
  }
  write_file(m.out_dir / "sweep_p1.csv", csv.str());
  if (m.artifacts.path_plot && !best.empty()) {
    std::vector<const Trajectory*> paths;
    for (const Solution& s : best) paths.push_back(&s.trajectory);
    emit(m.out_dir / "paths.svg",
         [&](std::ostream& os) { write_path_svg(os, paths); });
  }
  return failed ? kSolverFailure : kOk;
}

int cmd_verify(const Scenario& scenario, Scheme scheme,
               const std::filesystem::path& trajectory_csv,
               const Tolerances& tolerances, std::ostream& out,
               std::ostream& err) {
  Scenario scn = scenario;
  Solution sol;
  double stored = 0.0;
  try {
    std::ifstream f(trajectory_csv);
    if (!f) throw ParseError("cannot open " + trajectory_csv.string());
    const TrajectoryTable table = read_trajectory_csv(f);
    scn.n_grid = static_cast<int>(table.t.size()) - 1;
    if (std::abs(table.t.back() - scn.t_f) > 1e-9 * scn.t_f) {
      throw ParseError("final time " + format_exact(table.t.back()) +
                       " does not match t_f_s " + format_exact(scn.t_f));
    }
    validate(scn);
    sol.control = control_from_table(table, scn);
    const State& end = table.states.back();
    stored = fim_det(end.z1, end.z2, end.z3);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  VerificationReport report;
  try {
    sol.trajectory = simulate(scn, sol.control, scheme);
    sol.objective_reported = sol.trajectory.fim.det;
    report = verify(sol, scn, scheme, tolerances);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kSolverFailure;
  }
  const double diff = std::abs(sol.objective_reported - stored) /
                      std::max(std::abs(stored), 1e-300);
  out << "objective_stored: " << format_exact(stored) << '\n';
  out << "objective_recomputed: " << format_exact(sol.objective_reported)
      << '\n';
  out << "objective_relative_difference: " << format_exact(diff) << '\n';
  print_report(out, report);
  return report.passed ? kOk : kSolverFailure;
}

}  // namespace obsplan::cli
