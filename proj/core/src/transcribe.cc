#include "obsplan/transcribe.h"

#include <cmath>
#include <stdexcept>

namespace obsplan {
namespace {

// s + a * d, componentwise over all six slots.
State axpy(const State& s, double a, const State& d) {
  return {s.x + a * d.x,   s.y + a * d.y,   s.theta + a * d.theta,
          s.z1 + a * d.z1, s.z2 + a * d.z2, s.z3 + a * d.z3};
}

// Increment applied to `s` over one step. For Heun, `predictor` receives the
// Euler predictor when non-null.
State increment(const State& s, double u, double h, Scheme scheme,
                const Scenario& scn, State* predictor) {
  const State k1 = state_rhs(s, u, scn);
  if (scheme == Scheme::kEuler) return axpy(State{}, h, k1);
  const State p = axpy(s, h, k1);
  const State k2 = state_rhs(p, u, scn);
  if (predictor != nullptr) *predictor = p;
  return axpy(State{}, 0.5 * h, axpy(k1, 1.0, k2));
}

// Running sum with a Neumaier compensation term per slot. The information
// integrals accumulate a thousand small increments and plain summation leaves
// roundoff well above what the line search needs to resolve near an optimum.
struct CompensatedState {
  State hi;
  State lo;

  void add(const State& d) {
    add1(hi.x, lo.x, d.x);
    add1(hi.y, lo.y, d.y);
    add1(hi.theta, lo.theta, d.theta);
    add1(hi.z1, lo.z1, d.z1);
    add1(hi.z2, lo.z2, d.z2);
    add1(hi.z3, lo.z3, d.z3);
  }
  State value() const { return axpy(hi, 1.0, lo); }

 private:
  static void add1(double& s, double& c, double d) {
    const double t = s + d;
    c += std::abs(s) >= std::abs(d) ? (s - t) + d : (d - t) + s;
    s = t;
  }
};

State initial_state(const Scenario& scn, std::span<const double> u) {
  State s;
  s.x = scn.x0;
  s.y = scn.y0;
  s.theta = scn.kind == ProblemKind::kFreeCourse ? u.front() : scn.theta0;
  return s;
}

// Accumulates A^T w into `sbar` and B^T w into the return value, where A and
// B are the Jacobians of state_rhs at (s, u) with respect to state and
// control.
double rhs_vjp(const State& s, double u, const State& w, const Scenario& scn,
               State& sbar) {
  const bool free_course = scn.kind == ProblemKind::kFreeCourse;
  const double course = free_course ? u : s.theta;
  const double dcourse =
      scn.v * (-w.x * std::sin(course) + w.y * std::cos(course));

  const double x = s.x;
  const double y = s.y;
  const double rho = x * x + y * y;
  const double rho3 = rho * rho * rho;
  const double x2 = x * x;
  const double y2 = y * y;
  const double dx = (w.z1 * (2.0 * x * y2 - 2.0 * x2 * x) -
                     w.z2 * 4.0 * x * y2 + w.z3 * (y2 * y - 3.0 * x2 * y)) /
                    rho3;
  const double dy = (-w.z1 * 4.0 * x2 * y + w.z2 * (2.0 * y * x2 - 2.0 * y2 * y) +
                     w.z3 * (x2 * x - 3.0 * x * y2)) /
                    rho3;
  sbar.x += dx;
  sbar.y += dy;
  if (free_course) return dcourse;
  sbar.theta += dcourse;
  return w.theta;
}

void check_grid(const Scenario& scn, std::span<const double> u) {
  if (static_cast<int>(u.size()) != scn.n_grid) {
    throw std::invalid_argument("control grid length does not match n_grid");
  }
}

}  // namespace

std::string_view scheme_name(Scheme scheme) {
  return scheme == Scheme::kEuler ? "euler" : "heun";
}

Trajectory simulate(const Scenario& scn, const ControlGrid& u, Scheme scheme) {
  check_grid(scn, u.values);
  const int n = scn.n_grid;
  const double h = scn.step();
  const bool free_course = scn.kind == ProblemKind::kFreeCourse;

  Trajectory traj;
  traj.times.resize(n + 1);
  traj.states.resize(n + 1);
  traj.states[0] = initial_state(scn, u.values);
  traj.times[0] = 0.0;
  CompensatedState acc{traj.states[0], State{}};
  for (int k = 0; k < n; ++k) {
    acc.add(increment(traj.states[k], u.values[k], h, scheme, scn, nullptr));
    traj.states[k + 1] = acc.value();
    traj.times[k + 1] = (k + 1) * h;
    if (free_course) {
      traj.states[k + 1].theta = u.values[std::min(k + 1, n - 1)];
    }
  }
  traj.times[n] = scn.t_f;
  traj.fim = make_fim(traj.states[n]);
  traj.objective = -traj.fim.det;
  return traj;
}

double objective(const Trajectory& traj) {
  const State& s = traj.states.back();
  return s.z3 * s.z3 - s.z1 * s.z2;
}

double objective_and_gradient(const Scenario& scn, std::span<const double> u,
                              Scheme scheme, std::span<double> grad) {
  check_grid(scn, u);
  const int n = scn.n_grid;
  const double h = scn.step();
  const bool want_grad = !grad.empty();
  if (want_grad && static_cast<int>(grad.size()) != n) {
    throw std::invalid_argument("gradient buffer length does not match n_grid");
  }

  thread_local std::vector<State> states;
  thread_local std::vector<State> predictors;
  states.resize(n + 1);
  predictors.resize(want_grad && scheme == Scheme::kHeun ? n : 0);

  states[0] = initial_state(scn, u);
  CompensatedState acc{states[0], State{}};
  for (int k = 0; k < n; ++k) {
    State* pred = predictors.empty() ? nullptr : &predictors[k];
    acc.add(increment(states[k], u[k], h, scheme, scn, pred));
    states[k + 1] = acc.value();
  }
  const State& end = states[n];
  const double value = end.z3 * end.z3 - end.z1 * end.z2;
  if (!want_grad) return value;

  // Reverse sweep. `w` is d(objective)/d(state_{k+1}).
  State w;
  w.z1 = -end.z2;
  w.z2 = -end.z1;
  w.z3 = 2.0 * end.z3;
  for (int k = n - 1; k >= 0; --k) {
    State sbar = w;
    double ubar = 0.0;
    if (scheme == Scheme::kEuler) {
      const State k1bar = axpy(State{}, h, w);
      ubar += rhs_vjp(states[k], u[k], k1bar, scn, sbar);
    } else {
      // next = s + h/2 k1 + h/2 k2, k2 = f(p), p = s + h k1.
      const State k2bar = axpy(State{}, 0.5 * h, w);
      State pbar;
      ubar += rhs_vjp(predictors[k], u[k], k2bar, scn, pbar);
      State k1bar = axpy(State{}, 0.5 * h, w);
      k1bar = axpy(k1bar, h, pbar);
      sbar = axpy(sbar, 1.0, pbar);
      ubar += rhs_vjp(states[k], u[k], k1bar, scn, sbar);
    }
    grad[k] = ubar;
    w = sbar;
  }
  return value;
}

std::vector<double> gradient(const Scenario& scn, const ControlGrid& u,
                             Scheme scheme) {
  std::vector<double> g(u.values.size());
  objective_and_gradient(scn, u.values, scheme, g);
  return g;
}

std::vector<double> fd_gradient(const Scenario& scn, const ControlGrid& u,
                                Scheme scheme, double step) {
  std::vector<double> g(u.values.size());
  ControlGrid probe = u;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double base = u.values[k];
    probe.values[k] = base + step;
    const double plus = objective(simulate(scn, probe, scheme));
    probe.values[k] = base - step;
    const double minus = objective(simulate(scn, probe, scheme));
    probe.values[k] = base;
    g[k] = (plus - minus) / (2.0 * step);
  }
  return g;
}

}  // namespace obsplan
