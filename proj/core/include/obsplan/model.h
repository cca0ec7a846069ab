#ifndef OBSPLAN_MODEL_H_
#define OBSPLAN_MODEL_H_

// Continuous-time model of a constant-speed observer taking bearing
// measurements of a stationary target located at the origin.
//
// Units are kilometers, seconds and radians throughout. Positions are
// relative (observer minus target). The three accumulators z1, z2, z3 are
// the running integrals of the Fisher information integrands, so that
// sigma^4 * det F = z1 * z2 - z3^2 at the final time.

#include <stdexcept>
#include <string>

namespace obsplan {

enum class ProblemKind {
  kFreeCourse,     // course is the control, unconstrained (P1)
  kBoundedTurn,    // course is a state, turn rate is the bounded control (P3)
};

struct Scenario {
  ProblemKind kind = ProblemKind::kBoundedTurn;
  double v = 0.04;                 // km/s
  double turn_rate_max = 0.0;      // rad/s, bounded-turn problem only
  double x0 = 5.0;                 // km
  double y0 = 0.0;                 // km
  double theta0 = 0.0;             // rad, ignored for the free-course problem
  double t_f = 100.0;              // s
  int n_grid = 1000;
  double sigma = 1.0;              // rad, reporting only
  double min_range = 1e-6;         // km

  double step() const { return t_f / n_grid; }
  double initial_range() const;
  // v / turn_rate_max, the minimum turning radius [km].
  double turning_radius() const;
};

struct State {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double z1 = 0.0;
  double z2 = 0.0;
  double z3 = 0.0;
};

// Adjoint of (x, y, theta) plus the terminal accumulator values that fix the
// constant adjoints lambda_z1 = -zbar2, lambda_z2 = -zbar1, lambda_z3 = 2 zbar3.
struct Costate {
  double lx = 0.0;
  double ly = 0.0;
  double ltheta = 0.0;
  double zbar1 = 0.0;
  double zbar2 = 0.0;
  double zbar3 = 0.0;
};

struct CostateDerivative {
  double lx = 0.0;
  double ly = 0.0;
  double ltheta = 0.0;
};

struct Fim {
  double z1 = 0.0;
  double z2 = 0.0;
  double z3 = 0.0;
  double det = 0.0;  // z1 * z2 - z3^2, i.e. sigma^4 * det F
};

// Thrown by validate() and by the scenario parser. The message names the
// offending field.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The observer came closer to the target than Scenario::min_range, where the
// information integrands are singular.
class RangeUnderflowError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

void validate(const Scenario& scn);

// Time derivative of the full state. For kBoundedTurn `u` is the turn rate
// and drives theta; for kFreeCourse `u` is the course itself and the theta
// slot of the result is zero.
State state_rhs(const State& s, double u, const Scenario& scn);

// The three information integrands x^2/r^4, y^2/r^4, x*y/r^4.
struct Integrands {
  double i1 = 0.0;
  double i2 = 0.0;
  double i3 = 0.0;
};
Integrands information_integrands(double x, double y, const Scenario& scn);

double fim_det(double z1, double z2, double z3);
Fim make_fim(const State& terminal);

CostateDerivative costate_rhs(const State& s, const Costate& c,
                              const Scenario& scn);

// Quadrant-correct bearing of (x, y) in (-pi, pi].
double bearing(double x, double y);

// Wraps an angle to (-pi, pi].
double wrap_angle(double a);
// Distance between two angles on the circle of circumference `period`.
double angular_distance(double a, double b, double period);

}  // namespace obsplan

#endif  // OBSPLAN_MODEL_H_
