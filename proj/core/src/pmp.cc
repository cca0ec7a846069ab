#include "obsplan/pmp.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace obsplan {
namespace {

constexpr double kBangControlTol = 1e-9;

Costate advance(const Costate& c, double a, const CostateDerivative& d) {
  Costate out = c;
  out.lx += a * d.lx;
  out.ly += a * d.ly;
  out.ltheta += a * d.ltheta;
  return out;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Collapses equal neighbours into single arcs.
std::vector<Arc> runs(const std::vector<ArcKind>& kinds) {
  std::vector<Arc> arcs;
  for (int k = 0; k < static_cast<int>(kinds.size()); ++k) {
    if (!arcs.empty() && arcs.back().kind == kinds[k]) {
      arcs.back().last = k;
    } else {
      arcs.push_back({kinds[k], k, k});
    }
  }
  return arcs;
}

int length(const Arc& a) { return a.last - a.first + 1; }

std::string make_label(const std::vector<Arc>& arcs) {
  std::string label;
  for (const Arc& a : arcs) {
    if (!label.empty()) label += "–";
    label += arc_name(a.kind);
  }
  return label;
}

}  // namespace

CostateTrajectory integrate_costates(const Trajectory& traj,
                                     const Scenario& scn, Scheme scheme) {
  const int n = static_cast<int>(traj.states.size()) - 1;
  if (n < 1) throw std::invalid_argument("trajectory has no steps");
  const State& end = traj.states.back();

  CostateTrajectory ct;
  ct.times = traj.times;
  ct.costates.resize(n + 1);
  ct.switching.resize(n + 1);
  ct.switching_rate.resize(n + 1);

  Costate c;
  c.zbar1 = end.z1;
  c.zbar2 = end.z2;
  c.zbar3 = end.z3;
  ct.costates[n] = c;
  for (int k = n - 1; k >= 0; --k) {
    const double h = traj.times[k + 1] - traj.times[k];
    const CostateDerivative d1 = costate_rhs(traj.states[k + 1], c, scn);
    if (scheme == Scheme::kEuler) {
      c = advance(c, -h, d1);
    } else {
      const Costate p = advance(c, -h, d1);
      const CostateDerivative d2 = costate_rhs(traj.states[k], p, scn);
      c = advance(advance(c, -0.5 * h, d1), -0.5 * h, d2);
    }
    ct.costates[k] = c;
  }
  for (int k = 0; k <= n; ++k) {
    ct.switching[k] = ct.costates[k].ltheta;
    ct.switching_rate[k] =
        costate_rhs(traj.states[k], ct.costates[k], scn).ltheta;
  }
  return ct;
}

std::vector<double> switching_function(const CostateTrajectory& ct) {
  return ct.switching;
}

std::string_view arc_name(ArcKind kind) {
  switch (kind) {
    case ArcKind::kBangPlus:
      return "bang(+)";
    case ArcKind::kBangMinus:
      return "bang(-)";
    case ArcKind::kSingular:
      return "singular";
  }
  return "?";
}

ArcStructure classify_arcs(const CostateTrajectory& ct, const ControlGrid& u,
                           const Scenario& scn, double eps_singular,
                           int min_arc_points) {
  if (scn.kind != ProblemKind::kBoundedTurn) {
    throw std::invalid_argument("arc classification needs a bounded turn rate");
  }
  if (u.size() + 1 != static_cast<int>(ct.switching.size())) {
    throw std::invalid_argument("control grid does not match costates");
  }
  const double scale = max_abs(ct.switching);
  if (scale == 0.0) {
    throw std::domain_error("switching function vanishes identically");
  }

  // A small switching value is only read as singular when the control is off
  // the bound its sign selects: the backward-integrated costate carries a
  // discretization floor that can exceed the switching function on a short
  // bang arc.
  const int n = u.size();
  std::vector<ArcKind> kinds(ct.switching.size());
  for (int k = 0; k <= n; ++k) {
    const double s = ct.switching[k];
    const ArcKind bang = s < 0.0 ? ArcKind::kBangPlus : ArcKind::kBangMinus;
    const double commanded = s < 0.0 ? scn.turn_rate_max : -scn.turn_rate_max;
    const double control = u.values[std::min(k, n - 1)];
    const bool at_bound =
        s != 0.0 && std::abs(control - commanded) <= kBangControlTol;
    kinds[k] = std::abs(s) <= eps_singular * scale && !at_bound
                   ? ArcKind::kSingular
                   : bang;
  }

  std::vector<Arc> arcs = runs(kinds);
  while (arcs.size() > 1) {
    auto shortest = std::min_element(
        arcs.begin(), arcs.end(),
        [](const Arc& a, const Arc& b) { return length(a) < length(b); });
    if (length(*shortest) >= min_arc_points) break;
    const std::size_t i = shortest - arcs.begin();
    ArcKind absorb;
    if (i == 0) {
      absorb = arcs[1].kind;
    } else if (i + 1 == arcs.size()) {
      absorb = arcs[i - 1].kind;
    } else {
      absorb = length(arcs[i - 1]) >= length(arcs[i + 1]) ? arcs[i - 1].kind
                                                           : arcs[i + 1].kind;
    }
    for (int k = arcs[i].first; k <= arcs[i].last; ++k) kinds[k] = absorb;
    arcs = runs(kinds);
  }
  return {arcs, make_label(arcs)};
}

double singular_course_check(const Trajectory& traj,
                             const CostateTrajectory& ct,
                             const ArcStructure& arcs, int exclude) {
  double worst = 0.0;
  for (const Arc& a : arcs.arcs) {
    if (a.kind != ArcKind::kSingular) continue;
    for (int k = a.first + exclude; k <= a.last - exclude; ++k) {
      const Costate& c = ct.costates[k];
      if (c.lx == 0.0 && c.ly == 0.0) continue;
      const double target = std::atan2(c.ly, c.lx);
      worst = std::max(worst, angular_distance(traj.states[k].theta, target,
                                               std::numbers::pi));
    }
  }
  return worst;
}

std::vector<double> hamiltonian_series(const Trajectory& traj,
                                       const CostateTrajectory& ct,
                                       const ControlGrid& u,
                                       const Scenario& scn) {
  const int n = static_cast<int>(traj.states.size()) - 1;
  if (u.size() != n || static_cast<int>(ct.costates.size()) != n + 1) {
    throw std::invalid_argument("trajectory, costates and controls disagree");
  }
  const bool free_course = scn.kind == ProblemKind::kFreeCourse;
  std::vector<double> h(n + 1);
  for (int k = 0; k <= n; ++k) {
    const State& s = traj.states[k];
    const Costate& c = ct.costates[k];
    const double control = u.values[std::min(k, n - 1)];
    const double course = free_course ? control : s.theta;
    const Integrands w = information_integrands(s.x, s.y, scn);
    double value = scn.v * (c.lx * std::cos(course) + c.ly * std::sin(course)) -
                   c.zbar2 * w.i1 - c.zbar1 * w.i2 + 2.0 * c.zbar3 * w.i3;
    if (!free_course) value += c.ltheta * control;
    h[k] = value;
  }
  return h;
}

VerificationReport verify(const Solution& sol, const Scenario& scn,
                          Scheme scheme, const Tolerances& tol) {
  const Trajectory& traj = sol.trajectory;
  const int n = static_cast<int>(traj.states.size()) - 1;
  const CostateTrajectory ct = integrate_costates(traj, scn, scheme);

  VerificationReport r;
  const Costate& end = ct.costates.back();
  r.transversality_residual =
      std::max({std::abs(end.lx), std::abs(end.ly), std::abs(end.ltheta)});
  r.fact1_residual = std::abs(ct.switching_rate.back());
  r.fact1_scale = max_abs(ct.switching_rate);

  if (scn.kind == ProblemKind::kBoundedTurn) {
    r.arc_structure = classify_arcs(ct, sol.control, scn, tol.eps_singular,
                                    tol.min_arc_points);
    const double scale = max_abs(ct.switching);
    for (int k = 0; k < n; ++k) {
      const double s = ct.switching[k];
      if (std::abs(s) <= tol.eps_singular * scale) continue;
      const double expected = s < 0.0 ? scn.turn_rate_max : -scn.turn_rate_max;
      if (std::abs(sol.control.values[k] - expected) > tol.bang_control) {
        ++r.bang_sign_violations;
      }
    }
  } else {
    // The free-course optimality condition holds everywhere, so the whole
    // horizon is checked as one singular arc.
    r.arc_structure.arcs = {{ArcKind::kSingular, 0, n}};
    r.arc_structure.label = make_label(r.arc_structure.arcs);
  }
  r.singular_theta_max_err = singular_course_check(traj, ct, r.arc_structure,
                                                   tol.boundary_exclusion);

  const std::vector<double> h = hamiltonian_series(traj, ct, sol.control, scn);
  double drift = 0.0;
  for (double value : h) drift = std::max(drift, std::abs(value - h.front()));
  r.hamiltonian_drift = drift / (1.0 + std::abs(h.front()));

  r.passed = r.transversality_residual == 0.0 &&
             r.fact1_residual <= tol.fact1_relative * r.fact1_scale &&
             r.bang_sign_violations == 0 &&
             r.singular_theta_max_err <= tol.singular_course &&
             r.hamiltonian_drift <= tol.hamiltonian_drift;
  return r;
}

}  // namespace obsplan
