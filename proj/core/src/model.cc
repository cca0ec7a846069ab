#include "obsplan/model.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace obsplan {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

double checked_range_sq(double x, double y, const Scenario& scn) {
  const double rho = x * x + y * y;
  if (!(rho >= scn.min_range * scn.min_range)) {
    std::ostringstream os;
    os << "range underflow: observer at (" << x << ", " << y
       << ") km is within " << scn.min_range << " km of the target";
    throw RangeUnderflowError(os.str());
  }
  return rho;
}

}  // namespace

double Scenario::initial_range() const { return std::hypot(x0, y0); }

double Scenario::turning_radius() const { return v / turn_rate_max; }

void validate(const Scenario& scn) {
  require(std::isfinite(scn.v) && scn.v > 0, "v must be positive");
  require(std::isfinite(scn.t_f) && scn.t_f > 0, "t_f must be positive");
  require(scn.n_grid >= 2, "n_grid must be at least 2");
  require(std::isfinite(scn.sigma) && scn.sigma > 0,
          "sigma must be positive");
  require(std::isfinite(scn.min_range) && scn.min_range > 0,
          "min_range must be positive");
  require(std::isfinite(scn.x0) && std::isfinite(scn.y0),
          "x0 and y0 must be finite");
  require(!(scn.x0 == 0.0 && scn.y0 == 0.0),
          "initial position coincides with target");
  require(scn.initial_range() >= scn.min_range,
          "initial position closer to target than min_range");
  if (scn.kind == ProblemKind::kBoundedTurn) {
    require(std::isfinite(scn.turn_rate_max) && scn.turn_rate_max > 0,
            "turn_rate_max must be positive");
    require(std::isfinite(scn.theta0), "theta0 must be finite");
  }
}

Integrands information_integrands(double x, double y, const Scenario& scn) {
  const double rho = checked_range_sq(x, y, scn);
  const double rho2 = rho * rho;
  return {x * x / rho2, y * y / rho2, x * y / rho2};
}

State state_rhs(const State& s, double u, const Scenario& scn) {
  const bool free_course = scn.kind == ProblemKind::kFreeCourse;
  const double course = free_course ? u : s.theta;
  const Integrands w = information_integrands(s.x, s.y, scn);
  return {scn.v * std::cos(course),
          scn.v * std::sin(course),
          free_course ? 0.0 : u,
          w.i1,
          w.i2,
          w.i3};
}

double fim_det(double z1, double z2, double z3) { return z1 * z2 - z3 * z3; }

Fim make_fim(const State& terminal) {
  return {terminal.z1, terminal.z2, terminal.z3,
          fim_det(terminal.z1, terminal.z2, terminal.z3)};
}

CostateDerivative costate_rhs(const State& s, const Costate& c,
                              const Scenario& scn) {
  const double x = s.x;
  const double y = s.y;
  const double rho = checked_range_sq(x, y, scn);
  const double rho3 = rho * rho * rho;
  const double x2 = x * x;
  const double y2 = y * y;

  CostateDerivative d;
  d.lx = (-2.0 * c.zbar2 * x2 * x + 6.0 * c.zbar3 * x2 * y +
          2.0 * (c.zbar2 - 2.0 * c.zbar1) * x * y2 -
          2.0 * c.zbar3 * y2 * y) /
         rho3;
  d.ly = (-2.0 * c.zbar1 * y2 * y + 6.0 * c.zbar3 * y2 * x +
          2.0 * (c.zbar1 - 2.0 * c.zbar2) * y * x2 -
          2.0 * c.zbar3 * x2 * x) /
         rho3;
  d.ltheta = scn.v * (c.lx * std::sin(s.theta) - c.ly * std::cos(s.theta));
  return d;
}

double bearing(double x, double y) {
  if (x == 0.0 && y == 0.0) {
    throw std::domain_error("bearing undefined at the target position");
  }
  const double b = std::atan2(y, x);
  // atan2 returns -pi for (negative x, -0.0); fold onto the closed end.
  return b == -std::numbers::pi ? std::numbers::pi : b;
}

double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double r = std::fmod(a, kTwoPi);
  if (r <= -std::numbers::pi) r += kTwoPi;
  if (r > std::numbers::pi) r -= kTwoPi;
  return r;
}

double angular_distance(double a, double b, double period) {
  double d = std::fmod(std::abs(a - b), period);
  return std::min(d, period - d);
}

}  // namespace obsplan
