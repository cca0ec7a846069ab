#ifndef OBSPLAN_PMP_H_
#define OBSPLAN_PMP_H_

// Maximum Principle checks on a computed solution. The costates are obtained
// by integrating the continuous adjoint equations backward along the stored
// states, independently of the discrete adjoint used by the optimizer.

#include <string>
#include <vector>

#include "obsplan/model.h"
#include "obsplan/optimize.h"
#include "obsplan/transcribe.h"

namespace obsplan {

struct CostateTrajectory {
  std::vector<double> times;
  std::vector<Costate> costates;
  std::vector<double> switching;       // lambda_theta
  std::vector<double> switching_rate;  // d lambda_theta / dt
};

CostateTrajectory integrate_costates(const Trajectory& traj,
                                     const Scenario& scn, Scheme scheme);

std::vector<double> switching_function(const CostateTrajectory& ct);

enum class ArcKind { kBangPlus, kBangMinus, kSingular };

std::string_view arc_name(ArcKind kind);

struct Arc {
  ArcKind kind;
  int first;  // grid indices, inclusive
  int last;
};

struct ArcStructure {
  std::vector<Arc> arcs;
  std::string label;  // e.g. "bang(+)–singular–bang(+)"
};

// Labels every grid point by the sign of the switching function relative to
// eps_singular * max |lambda_theta|, then merges runs shorter than
// min_arc_points into a neighbour. Throws std::domain_error when the
// switching function vanishes identically.
ArcStructure classify_arcs(const CostateTrajectory& ct, const ControlGrid& u,
                           const Scenario& scn, double eps_singular,
                           int min_arc_points = 3);

// Largest angular distance, modulo pi, between the course and
// atan2(lambda_y, lambda_x) over singular-arc points. `exclude` points at
// each end of every arc are skipped, as are points where lambda_x and
// lambda_y both vanish. Returns 0 when nothing is left to check.
double singular_course_check(const Trajectory& traj,
                             const CostateTrajectory& ct,
                             const ArcStructure& arcs, int exclude = 3);

std::vector<double> hamiltonian_series(const Trajectory& traj,
                                       const CostateTrajectory& ct,
                                       const ControlGrid& u,
                                       const Scenario& scn);

struct Tolerances {
  double eps_singular = 1e-3;
  int min_arc_points = 3;
  int boundary_exclusion = 3;
  double fact1_relative = 1e-12;
  double singular_course = 0.02;  // rad
  double hamiltonian_drift = 1e-3;
  double bang_control = 1e-9;     // rad/s
};

struct VerificationReport {
  double transversality_residual = 0.0;
  double fact1_residual = 0.0;  // |d lambda_theta / dt| at t_f
  double fact1_scale = 0.0;     // max_t |d lambda_theta / dt|
  int bang_sign_violations = 0;
  double singular_theta_max_err = 0.0;
  double hamiltonian_drift = 0.0;
  ArcStructure arc_structure;
  bool passed = false;
};

VerificationReport verify(const Solution& sol, const Scenario& scn,
                          Scheme scheme, const Tolerances& tol = {});

}  // namespace obsplan

#endif  // OBSPLAN_PMP_H_
