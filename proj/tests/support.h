#ifndef OBSPLAN_TESTS_SUPPORT_H_
#define OBSPLAN_TESTS_SUPPORT_H_

#include <numbers>

#include "obsplan/model.h"
#include "obsplan/transcribe.h"

namespace obsplan::testing {

inline constexpr double kDeg = std::numbers::pi / 180.0;

// 40 m/s observer 5 km east of the target, heading east, 5 deg/s turn bound.
inline Scenario example(double t_f = 100.0, int n_grid = 1000) {
  Scenario scn;
  scn.kind = ProblemKind::kBoundedTurn;
  scn.v = 0.04;
  scn.turn_rate_max = 5.0 * kDeg;
  scn.x0 = 5.0;
  scn.y0 = 0.0;
  scn.theta0 = 0.0;
  scn.t_f = t_f;
  scn.n_grid = n_grid;
  return scn;
}

inline Scenario free_course(double t_f, int n_grid = 1000) {
  Scenario scn = example(t_f, n_grid);
  scn.kind = ProblemKind::kFreeCourse;
  return scn;
}

inline bool cauchy_schwarz_holds(const Trajectory& traj) {
  for (const State& s : traj.states) {
    const double p = s.z1 * s.z2;
    if (s.z3 * s.z3 > p + 1e-12 * (1.0 + p)) return false;
  }
  return true;
}

}  // namespace obsplan::testing

#endif  // OBSPLAN_TESTS_SUPPORT_H_
