#ifndef OBSPLAN_OPTIMIZE_H_
#define OBSPLAN_OPTIMIZE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "obsplan/model.h"
#include "obsplan/transcribe.h"

namespace obsplan {

struct SolveOptions {
  int max_iter = 5000;
  // Bound on the infinity norm of the projected gradient, scaled by
  // 1 + |objective|.
  double grad_tol = 1e-8;
  double armijo_c = 1e-4;
  int memory = 10;
  std::uint64_t seed = 20201;
  // Upper bound on concurrently running multistart solves; 0 picks the
  // hardware concurrency.
  int threads = 0;
};

void validate(const SolveOptions& opts);

struct Solution {
  ControlGrid control;
  Trajectory trajectory;
  double objective_reported = 0.0;  // sigma^4 det F = -objective
  int iterations = 0;
  bool converged = false;
  double projected_gradient_norm = 0.0;
  std::string start_label;
  std::string message;
  // Index into the multistart result of the branch this one mirrors about
  // the x-axis, or -1.
  int mirror_of = -1;
};

ControlGrid project(const ControlGrid& u, const Scenario& scn);

// Infinity norm of x - P(x - g).
double projected_gradient_norm(const ControlGrid& u,
                               const std::vector<double>& grad,
                               const Scenario& scn);

Solution solve(const Scenario& scn, const ControlGrid& init,
               const SolveOptions& opts, Scheme scheme);

struct StartPoint {
  std::string label;
  ControlGrid control;
};

// The deterministic seed family used by multistart().
std::vector<StartPoint> start_points(const Scenario& scn, std::uint64_t seed);

// Converged branches, deduplicated and sorted by descending sigma^4 det F.
// Of two mirror images, the one that first moves to y > 0 comes first.
// Throws std::runtime_error if no start converges.
std::vector<Solution> multistart(const Scenario& scn, const SolveOptions& opts,
                                 Scheme scheme);

// True if two solutions count as the same branch: objectives within 0.1 %
// and courses at mid horizon within 2 degrees.
bool same_branch(const Solution& a, const Solution& b);

}  // namespace obsplan

#endif  // OBSPLAN_OPTIMIZE_H_
