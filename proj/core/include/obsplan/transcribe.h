#ifndef OBSPLAN_TRANSCRIBE_H_
#define OBSPLAN_TRANSCRIBE_H_

// Single-shooting discretization: the controls are piecewise constant on a
// uniform grid and the states are obtained by explicit integration. The
// gradient is the exact adjoint of the discrete forward map.

#include <span>
#include <string_view>
#include <vector>

#include "obsplan/model.h"

namespace obsplan {

enum class Scheme {
  kEuler,
  kHeun,  // explicit trapezoidal predictor-corrector
};

std::string_view scheme_name(Scheme scheme);

// Turn rates [rad/s] for kBoundedTurn, courses [rad] for kFreeCourse. Value k
// holds on [k h, (k+1) h).
struct ControlGrid {
  std::vector<double> values;

  ControlGrid() = default;
  explicit ControlGrid(std::vector<double> v) : values(std::move(v)) {}
  static ControlGrid constant(int n, double value) {
    return ControlGrid(std::vector<double>(n, value));
  }
  int size() const { return static_cast<int>(values.size()); }
};

struct Trajectory {
  std::vector<double> times;   // n_grid + 1 instants
  std::vector<State> states;   // n_grid + 1 states
  double objective = 0.0;      // z3^2 - z1 z2 at t_f (minimization sense)
  Fim fim;
};

Trajectory simulate(const Scenario& scn, const ControlGrid& u, Scheme scheme);

double objective(const Trajectory& traj);

// Objective of the discretized problem and, if `grad` is non-empty, its
// gradient with respect to every control value. `grad` must then have
// n_grid entries.
double objective_and_gradient(const Scenario& scn, std::span<const double> u,
                              Scheme scheme, std::span<double> grad);

std::vector<double> gradient(const Scenario& scn, const ControlGrid& u,
                             Scheme scheme);

// Central finite differences of objective(simulate(.)). Test oracle.
std::vector<double> fd_gradient(const Scenario& scn, const ControlGrid& u,
                                Scheme scheme, double step);

}  // namespace obsplan

#endif  // OBSPLAN_TRANSCRIBE_H_
