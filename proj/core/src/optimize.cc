#include "obsplan/optimize.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

namespace obsplan {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBranchObjectiveTol = 1e-3;
constexpr double kBranchCourseTol = 2.0 * std::numbers::pi / 180.0;
constexpr double kSaddleTol = 1e-12;
constexpr double kOvershoot = std::numbers::pi / 6.0;
constexpr int kMaxBacktracks = 60;

bool bounded(const Scenario& scn) {
  return scn.kind == ProblemKind::kBoundedTurn;
}

double clamp_control(double value, const Scenario& scn) {
  if (!bounded(scn)) return value;
  return std::clamp(value, -scn.turn_rate_max, scn.turn_rate_max);
}

double dot(const std::vector<double>& a, const std::vector<double>& b,
           const std::vector<char>& mask) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (mask[i]) s += a[i] * b[i];
  }
  return s;
}

// Objective with gradient; +inf if the trajectory hits the range guard.
double evaluate(const Scenario& scn, const std::vector<double>& u,
                Scheme scheme, std::vector<double>& grad) {
  try {
    return objective_and_gradient(scn, u, scheme, grad);
  } catch (const RangeUnderflowError&) {
    return kInf;
  }
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::abs(e));
  return m;
}

struct Pair {
  std::vector<double> s;
  std::vector<double> y;
};

// Initial inverse-Hessian metric on the free variables. A turn-rate grid
// acts on the objective through the integrated course, so its Hessian
// behaves like L^T W L with L the cumulative sum; the metric applies
// L^{-1} L^{-T} (a second difference) on every contiguous free run. Course
// grids use the identity.
std::vector<double> apply_metric(const std::vector<double>& q,
                                 const std::vector<char>& free,
                                 const Scenario& scn) {
  const std::size_t n = q.size();
  std::vector<double> out(n, 0.0);
  if (!bounded(scn)) {
    for (std::size_t i = 0; i < n; ++i) out[i] = free[i] ? q[i] : 0.0;
    return out;
  }
  std::size_t a = 0;
  while (a < n) {
    if (!free[a]) {
      ++a;
      continue;
    }
    std::size_t b = a;
    while (b + 1 < n && free[b + 1]) ++b;
    double r_prev = 0.0;
    for (std::size_t k = a; k <= b; ++k) {
      const double r = q[k] - (k < b ? q[k + 1] : 0.0);
      out[k] = r - r_prev;
      r_prev = r;
    }
    a = b + 1;
  }
  return out;
}

// Two-loop recursion restricted to the free variables.
std::vector<double> quasi_newton_direction(const std::deque<Pair>& history,
                                           const std::vector<double>& grad,
                                           const std::vector<char>& free,
                                           const Scenario& scn) {
  const std::size_t n = grad.size();
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = free[i] ? grad[i] : 0.0;

  std::vector<double> alpha(history.size());
  std::vector<double> rho(history.size());
  for (std::size_t j = history.size(); j-- > 0;) {
    const Pair& p = history[j];
    const double sy = dot(p.s, p.y, free);
    rho[j] = sy > 0 ? 1.0 / sy : 0.0;
    alpha[j] = rho[j] * dot(p.s, q, free);
    for (std::size_t i = 0; i < n; ++i) {
      if (free[i]) q[i] -= alpha[j] * p.y[i];
    }
  }
  const Pair& last = history.back();
  const double sy = dot(last.s, last.y, free);
  const double yMy = dot(last.y, apply_metric(last.y, free, scn), free);
  const double gamma = (yMy > 0 && sy > 0) ? sy / yMy : 1.0;
  q = apply_metric(q, free, scn);
  for (double& qi : q) qi *= gamma;
  for (std::size_t j = 0; j < history.size(); ++j) {
    const Pair& p = history[j];
    const double beta = rho[j] * dot(p.y, q, free);
    for (std::size_t i = 0; i < n; ++i) {
      if (free[i]) q[i] += (alpha[j] - beta) * p.s[i];
    }
  }
  for (double& qi : q) qi = -qi;
  return q;
}

// Variables within `eps` of a bound with the gradient pushing outward are
// held at that bound; the metric acts on the rest.
std::vector<char> free_set(const std::vector<double>& u,
                           const std::vector<double>& grad, double eps,
                           const Scenario& scn) {
  std::vector<char> free(u.size(), 1);
  if (!bounded(scn)) return free;
  const double b = scn.turn_rate_max;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if ((u[i] <= -b + eps && grad[i] > 0) || (u[i] >= b - eps && grad[i] < 0)) {
      free[i] = 0;
    }
  }
  return free;
}

// The course at mid horizon identifies a branch. Near t_f the course is only
// loosely pinned because the switching function and its rate both vanish
// there (P3) or the control loses all influence (P1); mirror images of a
// free-course solution share their initial course.
double branch_course(const Solution& s) {
  const auto& states = s.trajectory.states;
  if (states.empty()) return 0.0;
  return states[states.size() / 2].theta;
}

// Sign of the first off-axis position.
int side(const Solution& s) {
  for (const State& st : s.trajectory.states) {
    if (st.y != 0.0) return st.y > 0.0 ? 1 : -1;
  }
  return 0;
}

// Stationary points without information (radial paths) are saddles, not
// branches. Rounding can leave a tiny positive determinant on them.
bool informative(const Solution& s) {
  const Fim& f = s.trajectory.fim;
  return f.det > kSaddleTol * (f.z1 + f.z2) * (f.z1 + f.z2);
}

bool mirror_symmetric(const Scenario& scn) {
  if (scn.y0 != 0.0) return false;
  return scn.kind == ProblemKind::kFreeCourse || std::sin(scn.theta0) == 0.0;
}

double relative_gap(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace

void validate(const SolveOptions& opts) {
  if (opts.max_iter <= 0) throw ValidationError("max_iter must be positive");
  if (!(opts.grad_tol > 0)) throw ValidationError("grad_tol must be positive");
  if (!(opts.armijo_c > 0 && opts.armijo_c < 1)) {
    throw ValidationError("armijo_c must lie in (0, 1)");
  }
  if (opts.memory <= 0) throw ValidationError("memory must be positive");
}

ControlGrid project(const ControlGrid& u, const Scenario& scn) {
  ControlGrid out = u;
  for (double& value : out.values) value = clamp_control(value, scn);
  return out;
}

double projected_gradient_norm(const ControlGrid& u,
                               const std::vector<double>& grad,
                               const Scenario& scn) {
  double norm = 0.0;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double pg = u.values[i] - clamp_control(u.values[i] - grad[i], scn);
    norm = std::max(norm, std::abs(pg));
  }
  return norm;
}

Solution solve(const Scenario& scn, const ControlGrid& init,
               const SolveOptions& opts, Scheme scheme) {
  validate(scn);
  validate(opts);
  if (init.size() != scn.n_grid) {
    throw std::invalid_argument("initial control length does not match n_grid");
  }

  const std::size_t n = static_cast<std::size_t>(scn.n_grid);
  std::vector<double> x = project(init, scn).values;
  std::vector<double> g(n);
  double f = evaluate(scn, x, scheme, g);
  if (!std::isfinite(f)) {
    throw RangeUnderflowError("initial control drives the observer onto the target");
  }

  // Typical control magnitude, used to size the first steepest-descent step.
  const double control_scale =
      bounded(scn) ? scn.turn_rate_max : 0.1;

  Solution sol;
  std::deque<Pair> history;
  std::vector<double> x_new(n);
  std::vector<double> g_new(n);
  int iter = 0;
  bool converged = false;
  std::string message = "iteration limit reached";

  for (; iter < opts.max_iter; ++iter) {
    const double pg = projected_gradient_norm(ControlGrid(x), g, scn);
    if (pg <= opts.grad_tol * (1.0 + std::abs(f))) {
      converged = true;
      message = "projected gradient below tolerance";
      break;
    }

    // Diagonal step scale in control units per unit gradient.
    double scale = control_scale / std::max(max_abs(g), 1e-300);
    if (!history.empty()) {
      const Pair& last = history.back();
      double sy = 0.0, yy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        sy += last.s[i] * last.y[i];
        yy += last.y[i] * last.y[i];
      }
      if (sy > 0 && yy > 0) scale = sy / yy;
    }
    double eps = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      eps = std::max(eps, std::abs(x[i] - clamp_control(x[i] - scale * g[i], scn)));
    }
    eps = std::min(eps, 1e-2 * control_scale);
    const std::vector<char> free = free_set(x, g, eps, scn);
    bool accepted = false;
    double f_new = kInf;
    // Quasi-Newton (or metric) direction first; if that fails, drop the
    // memory and take one plain projected-gradient step, which is always a
    // descent direction after projection.
    for (int attempt = 0; attempt < 3 && !accepted; ++attempt) {
      std::vector<double> d;
      double alpha = 1.0;
      const bool plain = attempt == 2;
      if (history.empty() || plain) {
        d = plain ? g : apply_metric(g, free, scn);
        double dmax = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          d[i] = free[i] ? -d[i] : 0.0;
          dmax = std::max(dmax, std::abs(d[i]));
        }
        if (dmax == 0.0) continue;
        alpha = control_scale / dmax;
      } else {
        d = quasi_newton_direction(history, g, free, scn);
        if (dot(d, g, free) >= 0.0) {
          history.clear();
          continue;
        }
      }

      // Held variables take a diagonally scaled gradient step that shrinks
      // with the backtracking factor.
      double fraction = 1.0;
      for (int bt = 0; bt < kMaxBacktracks;
           ++bt, alpha *= 0.5, fraction *= 0.5) {
        double decrease = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double target =
              free[i] ? x[i] + alpha * d[i] : x[i] - fraction * scale * g[i];
          x_new[i] = clamp_control(target, scn);
          decrease += g[i] * (x_new[i] - x[i]);
        }
        if (decrease >= 0.0) continue;
        f_new = evaluate(scn, x_new, scheme, g_new);
        if (f_new <= f + opts.armijo_c * decrease) {
          accepted = true;
          break;
        }
      }
      if (!accepted) history.clear();
    }

    if (!accepted) {
      message = "line search failed";
      break;
    }

    Pair p{std::vector<double>(n), std::vector<double>(n)};
    double sy = 0.0;
    double yy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p.s[i] = x_new[i] - x[i];
      p.y[i] = g_new[i] - g[i];
      sy += p.s[i] * p.y[i];
      yy += p.y[i] * p.y[i];
    }
    if (sy > 1e-12 * yy) {
      history.push_back(std::move(p));
      if (static_cast<int>(history.size()) > opts.memory) history.pop_front();
    }
    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
  }

  sol.control = ControlGrid(x);
  sol.trajectory = simulate(scn, sol.control, scheme);
  sol.objective_reported = sol.trajectory.fim.det;
  sol.iterations = iter;
  sol.projected_gradient_norm = projected_gradient_norm(sol.control, g, scn);
  sol.converged = converged;
  sol.message = message;
  return sol;
}

std::vector<StartPoint> start_points(const Scenario& scn, std::uint64_t seed) {
  const int n = scn.n_grid;
  std::vector<StartPoint> starts;
  std::mt19937_64 rng(seed);

  if (bounded(scn)) {
    const double b = scn.turn_rate_max;
    for (double c : {1.0, 0.5, 0.0, -0.5, -1.0}) {
      starts.push_back({"const(" + std::to_string(c).substr(0, 4) + ")",
                        ControlGrid::constant(n, c * b)});
    }
    for (double sign : {1.0, -1.0}) {
      ControlGrid u = ControlGrid::constant(n, 0.0);
      for (int k = 0; k < n / 4; ++k) u.values[k] = sign * b;
      starts.push_back({sign > 0 ? "bang(+)-zero" : "bang(-)-zero", u});
    }
    // Turn until the course passes the line of sight to the target by
    // kOvershoot, then fly straight.
    const double sight = bearing(-scn.x0, -scn.y0);
    for (double sign : {1.0, -1.0}) {
      const double sweep =
          std::fmod(sign * (sight - scn.theta0) + 2.0 * std::numbers::pi,
                    2.0 * std::numbers::pi) +
          kOvershoot;
      const int steps = std::min(
          n, static_cast<int>(std::lround(sweep / (b * scn.step()))));
      ControlGrid u = ControlGrid::constant(n, 0.0);
      for (int k = 0; k < steps; ++k) u.values[k] = sign * b;
      starts.push_back({sign > 0 ? "overshoot(+)" : "overshoot(-)", u});
    }
    std::uniform_real_distribution<double> dist(-b, b);
    for (int r = 0; r < 8; ++r) {
      ControlGrid u = ControlGrid::constant(n, 0.0);
      for (double& value : u.values) value = dist(rng);
      starts.push_back({"random(" + std::to_string(r) + ")", u});
    }
    return starts;
  }

  const double reversed = bearing(scn.x0, scn.y0) + std::numbers::pi;
  starts.push_back({"reverse-bearing", ControlGrid::constant(n, reversed)});
  for (double tilt : {0.25, -0.25}) {
    starts.push_back({tilt > 0 ? "reverse-bearing(+)" : "reverse-bearing(-)",
                      ControlGrid::constant(n, reversed + tilt)});
  }
  for (double sign : {1.0, -1.0}) {
    ControlGrid u = ControlGrid::constant(n, 0.0);
    for (int k = 0; k < n; ++k) {
      u.values[k] = reversed + sign * 0.5 * std::numbers::pi * k / n;
    }
    starts.push_back({sign > 0 ? "ramp(+)" : "ramp(-)", u});
  }
  std::uniform_real_distribution<double> course(-std::numbers::pi,
                                                std::numbers::pi);
  std::normal_distribution<double> jitter(0.0, 0.05);
  for (int r = 0; r < 8; ++r) {
    const double base = course(rng);
    ControlGrid u = ControlGrid::constant(n, 0.0);
    for (double& value : u.values) value = base + jitter(rng);
    starts.push_back({"random(" + std::to_string(r) + ")", u});
  }
  return starts;
}

bool same_branch(const Solution& a, const Solution& b) {
  if (relative_gap(a.objective_reported, b.objective_reported) >
      kBranchObjectiveTol) {
    return false;
  }
  return angular_distance(branch_course(a), branch_course(b),
                          2.0 * std::numbers::pi) <= kBranchCourseTol;
}

std::vector<Solution> multistart(const Scenario& scn, const SolveOptions& opts,
                                 Scheme scheme) {
  validate(scn);
  validate(opts);
  const std::vector<StartPoint> starts = start_points(scn, opts.seed);
  std::vector<Solution> results(starts.size());
  std::vector<char> ok(starts.size(), 0);

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < starts.size(); i = next++) {
      try {
        results[i] = solve(scn, starts[i].control, opts, scheme);
        results[i].start_label = starts[i].label;
        ok[i] = results[i].converged;
      } catch (const RangeUnderflowError&) {
        ok[i] = 0;
      }
    }
  };
  int threads = opts.threads > 0
                    ? opts.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, static_cast<int>(starts.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::vector<Solution> converged;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    if (ok[i] && informative(results[i])) {
      converged.push_back(std::move(results[i]));
    }
  }
  if (converged.empty()) {
    throw std::runtime_error("multistart: no start converged");
  }
  std::stable_sort(converged.begin(), converged.end(),
                   [](const Solution& a, const Solution& b) {
                     if (a.objective_reported != b.objective_reported) {
                       return a.objective_reported > b.objective_reported;
                     }
                     return a.start_label < b.start_label;
                   });

  std::vector<Solution> branches;
  for (Solution& s : converged) {
    const bool duplicate =
        std::any_of(branches.begin(), branches.end(),
                    [&](const Solution& kept) { return same_branch(kept, s); });
    if (!duplicate) branches.push_back(std::move(s));
  }

  if (mirror_symmetric(scn)) {
    for (std::size_t j = 0; j < branches.size(); ++j) {
      Solution mirrored = branches[j];
      for (State& st : mirrored.trajectory.states) st.theta = -st.theta;
      for (double& c : mirrored.control.values) c = -c;
      for (std::size_t i = 0; i < j; ++i) {
        if (branches[i].mirror_of < 0 && same_branch(branches[i], mirrored)) {
          // The objectives of a mirror pair differ only by rounding; list
          // the twin that leaves the x-axis toward +y first.
          if (side(branches[j]) > 0 && side(branches[i]) < 0) {
            std::swap(branches[i], branches[j]);
          }
          branches[j].mirror_of = static_cast<int>(i);
          break;
        }
      }
    }
  }
  return branches;
}

}  // namespace obsplan
