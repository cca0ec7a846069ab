#ifndef OBSPLAN_IO_H_
#define OBSPLAN_IO_H_

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "obsplan/model.h"
#include "obsplan/optimize.h"
#include "obsplan/pmp.h"
#include "obsplan/transcribe.h"

namespace obsplan {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScenarioFile {
  Scenario scenario;
  Scheme scheme = Scheme::kHeun;
};

// `key = value` lines with `#` comments. Keys: kind (P1|P3), v_mps,
// turn_rate_max_dps, x0_km, y0_km, theta0_deg, t_f_s, n_grid, sigma, scheme
// (euler|heun). turn_rate_max_dps and theta0_deg are required for P3 only;
// n_grid, sigma and scheme are optional. Throws ParseError with the line
// number, or ValidationError if the result violates a Scenario invariant.
ScenarioFile parse_scenario(std::string_view text);

Scheme parse_scheme(std::string_view name);

// Shortest decimal text that reads back to the same double.
std::string format_exact(double value);
std::string format_sig4(double value);

inline constexpr std::string_view kTrajectoryHeader =
    "t,x_km,y_km,theta_rad,u_radps,z1,z2,z3";
inline constexpr std::string_view kCostateHeader =
    "t,lambda_x,lambda_y,lambda_theta,lambda_theta_dot";

// One row per grid instant. u_radps is the turn rate on the interval that
// starts at the row (the last row repeats the final interval); for the
// free-course problem it is the course increment divided by the step.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                          const ControlGrid& u, const Scenario& scn);
void write_costate_csv(std::ostream& out, const CostateTrajectory& ct);

struct TrajectoryTable {
  std::vector<double> t;
  std::vector<State> states;
  std::vector<double> u;
};

TrajectoryTable read_trajectory_csv(std::istream& in);

// Control grid stored in a trajectory table: the turn-rate column for P3,
// the course column for P1.
ControlGrid control_from_table(const TrajectoryTable& table,
                               const Scenario& scn);

// Branch paths in the x-y plane, one polyline each, and the target at the
// origin. Output depends only on the inputs.
void write_path_svg(std::ostream& out,
                    const std::vector<const Trajectory*>& paths);

// Time series plot, one polyline per series on shared axes.
void write_series_svg(std::ostream& out, const std::vector<double>& t,
                      const std::vector<std::vector<double>>& series,
                      std::string_view y_label);

void write_summary(std::ostream& out, const Solution& sol,
                   const VerificationReport& report, const Scenario& scn,
                   Scheme scheme);

void print_report(std::ostream& out, const VerificationReport& report);

}  // namespace obsplan

#endif  // OBSPLAN_IO_H_
