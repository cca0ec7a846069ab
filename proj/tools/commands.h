#ifndef OBSPLAN_TOOLS_COMMANDS_H_
#define OBSPLAN_TOOLS_COMMANDS_H_

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "obsplan/model.h"
#include "obsplan/optimize.h"
#include "obsplan/pmp.h"
#include "obsplan/transcribe.h"

namespace obsplan::cli {

enum ExitCode { kOk = 0, kSolverFailure = 1, kInputError = 2 };

// Free-course runs use a tighter default: their objective values are small,
// so grad_tol * (1 + |objective|) is effectively absolute and leaves the
// late-horizon courses loose.
inline constexpr double kFreeCourseGradTol = 1e-10;

struct Artifacts {
  bool trajectory = true;
  bool costates = true;
  bool summary = true;
  bool path_plot = true;
  bool series_plots = false;  // course and switching function

  bool any() const {
    return trajectory || costates || summary || path_plot || series_plots;
  }
};

struct RunManifest {
  Scenario scenario;
  Scheme scheme = Scheme::kHeun;
  SolveOptions options;
  Tolerances tolerances;
  std::filesystem::path out_dir = "out";
  Artifacts artifacts;
};

// v = 40 m/s, 5 km east of the target heading east, 5 deg/s, 1000 intervals.
Scenario example_scenario();

// Creates the output directory and checks that it accepts files. Throws
// ValidationError.
void prepare(const RunManifest& manifest);

int cmd_solve(const RunManifest& manifest, std::ostream& out,
              std::ostream& err);

int cmd_table1(const RunManifest& base, const std::vector<double>& horizons,
               std::ostream& out, std::ostream& err);

int cmd_sweep_p1(const RunManifest& base, const std::vector<double>& ratios,
                 std::ostream& out, std::ostream& err);

// The grid size is taken from the file; the scenario supplies everything
// else.
int cmd_verify(const Scenario& scn, Scheme scheme,
               const std::filesystem::path& trajectory_csv,
               const Tolerances& tolerances, std::ostream& out,
               std::ostream& err);

}  // namespace obsplan::cli

#endif  // OBSPLAN_TOOLS_COMMANDS_H_
