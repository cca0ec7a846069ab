#include "obsplan/pmp.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "support.h"

namespace obsplan {
namespace {

using testing::example;
using testing::free_course;
using std::numbers::pi;

class SolvedBranches : public ::testing::Test {
 protected:
  static const std::vector<Solution>& branches(double t_f) {
    auto it = cache().find(t_f);
    if (it == cache().end()) {
      it = cache().emplace(t_f, multistart(example(t_f), {}, Scheme::kHeun))
               .first;
    }
    return it->second;
  }

  static const Solution& global(double t_f) { return branches(t_f).front(); }

 private:
  static std::map<double, std::vector<Solution>>& cache() {
    static std::map<double, std::vector<Solution>> c;
    return c;
  }
};

TEST(IntegrateCostates, TransversalityAndFactOne) {
  const Scenario scn = example(100.0, 200);
  ControlGrid u = ControlGrid::constant(200, 0.0);
  for (int k = 0; k < 200; ++k) u.values[k] = 0.08 * std::sin(0.1 * k);
  for (Scheme scheme : {Scheme::kEuler, Scheme::kHeun}) {
    const Trajectory traj = simulate(scn, u, scheme);
    const CostateTrajectory ct = integrate_costates(traj, scn, scheme);
    ASSERT_EQ(ct.costates.size(), traj.states.size());
    EXPECT_EQ(ct.costates.back().lx, 0.0);
    EXPECT_EQ(ct.costates.back().ly, 0.0);
    EXPECT_EQ(ct.costates.back().ltheta, 0.0);
    EXPECT_EQ(ct.switching_rate.back(), 0.0);
    EXPECT_EQ(ct.costates.front().zbar1, traj.fim.z1);
    EXPECT_EQ(ct.costates.front().zbar3, traj.fim.z3);
    EXPECT_EQ(switching_function(ct), ct.switching);
  }
}

TEST(IntegrateCostates, ZeroInformationGivesZeroCostates) {
  const Scenario scn = example(100.0, 100);
  const Trajectory traj =
      simulate(scn, ControlGrid::constant(100, 0.0), Scheme::kHeun);
  const CostateTrajectory ct = integrate_costates(traj, scn, Scheme::kHeun);
  for (const Costate& c : ct.costates) {
    EXPECT_EQ(c.lx, 0.0);
    EXPECT_EQ(c.ly, 0.0);
    EXPECT_EQ(c.ltheta, 0.0);
  }
  EXPECT_THROW(classify_arcs(ct, ControlGrid::constant(100, 0.0), scn, 1e-3),
               std::domain_error);
}

// Switching rate against a difference quotient of the switching function.
TEST(IntegrateCostates, RateMatchesDifferenceQuotient) {
  const Scenario scn = example(100.0, 4000);
  ControlGrid u = ControlGrid::constant(4000, 0.0);
  for (int k = 0; k < 4000; ++k) u.values[k] = 0.08 * std::sin(0.0025 * k);
  const Trajectory traj = simulate(scn, u, Scheme::kHeun);
  const CostateTrajectory ct = integrate_costates(traj, scn, Scheme::kHeun);
  const double h = scn.step();
  double scale = 0.0;
  for (double r : ct.switching_rate) scale = std::max(scale, std::abs(r));
  for (int k = 100; k < 3900; k += 100) {
    const double dq = (ct.switching[k + 1] - ct.switching[k - 1]) / (2 * h);
    EXPECT_NEAR(dq, ct.switching_rate[k], 1e-3 * scale) << "k = " << k;
  }
}

TEST(ClassifyArcs, SyntheticPattern) {
  const Scenario scn = example(10.0, 20);
  CostateTrajectory ct;
  ct.switching.assign(21, 0.0);
  ControlGrid u = ControlGrid::constant(20, 0.0);
  for (int k = 0; k < 8; ++k) {
    ct.switching[k] = -1.0;
    u.values[k] = scn.turn_rate_max;
  }
  for (int k = 15; k <= 20; ++k) ct.switching[k] = 0.5;
  for (int k = 15; k < 20; ++k) u.values[k] = -scn.turn_rate_max;
  ct.switching[20] = 0.0;
  // An isolated blip inside the singular stretch is merged away.
  ct.switching[11] = 0.9;
  const ArcStructure a = classify_arcs(ct, u, scn, 1e-3);
  ASSERT_EQ(a.arcs.size(), 3u);
  EXPECT_EQ(a.arcs[0].kind, ArcKind::kBangPlus);
  EXPECT_EQ(a.arcs[1].kind, ArcKind::kSingular);
  EXPECT_EQ(a.arcs[2].kind, ArcKind::kBangMinus);
  EXPECT_EQ(a.arcs[0].first, 0);
  EXPECT_EQ(a.arcs[2].last, 20);
  for (std::size_t i = 1; i < a.arcs.size(); ++i) {
    EXPECT_EQ(a.arcs[i].first, a.arcs[i - 1].last + 1);
  }
  EXPECT_EQ(a.label, "bang(+)–singular–bang(-)");
}

TEST(ClassifyArcs, RejectsFreeCourse) {
  const Scenario scn = free_course(50.0, 10);
  CostateTrajectory ct;
  ct.switching.assign(11, 1.0);
  EXPECT_THROW(classify_arcs(ct, ControlGrid::constant(10, 0.0), scn, 1e-3),
               std::invalid_argument);
}

TEST(ArcName, Names) {
  EXPECT_EQ(arc_name(ArcKind::kBangPlus), "bang(+)");
  EXPECT_EQ(arc_name(ArcKind::kBangMinus), "bang(-)");
  EXPECT_EQ(arc_name(ArcKind::kSingular), "singular");
}

TEST(HamiltonianSeries, ReducesToInformationTermsWithoutAdjoints) {
  const Scenario scn = example(50.0, 4);
  Trajectory traj =
      simulate(scn, ControlGrid::constant(4, 0.05), Scheme::kHeun);
  CostateTrajectory ct;
  ct.times = traj.times;
  const Fim& f = traj.fim;
  ct.costates.assign(5, Costate{0, 0, 0, f.z1, f.z2, f.z3});
  ct.switching.assign(5, 0.0);
  ct.switching_rate.assign(5, 0.0);
  const std::vector<double> h =
      hamiltonian_series(traj, ct, ControlGrid::constant(4, 0.05), scn);
  for (int k = 0; k <= 4; ++k) {
    const State& s = traj.states[k];
    const Integrands w = information_integrands(s.x, s.y, scn);
    EXPECT_DOUBLE_EQ(h[k], -f.z2 * w.i1 - f.z1 * w.i2 + 2 * f.z3 * w.i3);
  }
}

TEST(SingularCourseCheck, SkipsDegeneratePoints) {
  const Scenario scn = example(10.0, 10);
  const Trajectory traj =
      simulate(scn, ControlGrid::constant(10, 0.0), Scheme::kHeun);
  CostateTrajectory ct;
  ct.costates.assign(11, Costate{});
  ArcStructure arcs;
  arcs.arcs = {{ArcKind::kSingular, 0, 10}};
  EXPECT_EQ(singular_course_check(traj, ct, arcs, 0), 0.0);
  // Costate direction perpendicular to the course everywhere.
  for (Costate& c : ct.costates) c.ly = 1.0;
  EXPECT_NEAR(singular_course_check(traj, ct, arcs, 0), pi / 2, 1e-15);
  // Anti-parallel counts as aligned.
  for (Costate& c : ct.costates) c = Costate{-2.0, 0, 0, 0, 0, 0};
  EXPECT_EQ(singular_course_check(traj, ct, arcs, 0), 0.0);
}

TEST_F(SolvedBranches, ShortHorizonPasses) {
  const Scenario scn = example(50.0);
  const VerificationReport r = verify(global(50.0), scn, Scheme::kHeun);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.transversality_residual, 0.0);
  EXPECT_EQ(r.bang_sign_violations, 0);
}

TEST_F(SolvedBranches, BangSingularAt100) {
  const Scenario scn = example(100.0);
  const Solution& sol = global(100.0);
  const VerificationReport r = verify(sol, scn, Scheme::kHeun);
  EXPECT_TRUE(r.passed);
  EXPECT_LE(r.singular_theta_max_err, 0.02);
  EXPECT_LE(r.fact1_residual, 1e-12 * r.fact1_scale);
  EXPECT_EQ(r.arc_structure.label, "bang(+)–singular");
  const Arc& first = r.arc_structure.arcs.front();
  for (int k = first.first; k <= first.last; ++k) {
    EXPECT_DOUBLE_EQ(std::abs(sol.control.values[k]), scn.turn_rate_max);
  }
}

TEST_F(SolvedBranches, MirrorFlipsBangKinds) {
  const Scenario scn = example(100.0);
  Solution mirrored = global(100.0);
  for (double& u : mirrored.control.values) u = -u;
  mirrored.trajectory = simulate(scn, mirrored.control, Scheme::kHeun);
  const VerificationReport a = verify(global(100.0), scn, Scheme::kHeun);
  const VerificationReport b = verify(mirrored, scn, Scheme::kHeun);
  ASSERT_EQ(a.arc_structure.arcs.size(), b.arc_structure.arcs.size());
  for (std::size_t i = 0; i < a.arc_structure.arcs.size(); ++i) {
    const Arc& x = a.arc_structure.arcs[i];
    const Arc& y = b.arc_structure.arcs[i];
    EXPECT_EQ(x.first, y.first);
    EXPECT_EQ(x.last, y.last);
    if (x.kind == ArcKind::kSingular) {
      EXPECT_EQ(y.kind, ArcKind::kSingular);
    } else {
      EXPECT_NE(x.kind, y.kind);
      EXPECT_NE(y.kind, ArcKind::kSingular);
    }
  }
  EXPECT_EQ(b.arc_structure.label, "bang(-)–singular");
}

TEST_F(SolvedBranches, PerturbedControlFails) {
  const Scenario scn = example(100.0);
  Solution bad = global(100.0);
  for (int k = 0; k < 60; ++k) bad.control.values[k] *= 0.5;
  bad.trajectory = simulate(scn, bad.control, Scheme::kHeun);
  const VerificationReport r = verify(bad, scn, Scheme::kHeun);
  EXPECT_FALSE(r.passed);
  EXPECT_TRUE(r.bang_sign_violations > 0 || r.singular_theta_max_err > 0.02);
}

TEST_F(SolvedBranches, TerminalBangAt160) {
  const Scenario scn = example(160.0);
  const Solution& sol = global(160.0);
  const VerificationReport r = verify(sol, scn, Scheme::kHeun);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.arc_structure.label, "bang(+)–singular–bang(+)");
  // Short end piece with lambda_theta < 0.
  const CostateTrajectory ct = integrate_costates(sol.trajectory, scn,
                                                  Scheme::kHeun);
  const Arc& last = r.arc_structure.arcs.back();
  EXPECT_LT(last.last - last.first, scn.n_grid / 20);
  for (int k = last.first; k < last.last; ++k) EXPECT_LT(ct.switching[k], 0.0);
}

TEST_F(SolvedBranches, DriftShrinksWithGrid) {
  const Solution& coarse = global(100.0);
  const Scenario fine_scn = example(100.0, 2000);
  ControlGrid fine_u = ControlGrid::constant(2000, 0.0);
  for (int k = 0; k < 2000; ++k) fine_u.values[k] = coarse.control.values[k / 2];
  const Solution fine = solve(fine_scn, fine_u, {}, Scheme::kHeun);
  ASSERT_TRUE(fine.converged);
  const double d1 =
      verify(coarse, example(100.0), Scheme::kHeun).hamiltonian_drift;
  const double d2 = verify(fine, fine_scn, Scheme::kHeun).hamiltonian_drift;
  EXPECT_LT(d2, d1);
}

TEST(Verify, FreeCourseWholeHorizonSingular) {
  const Scenario scn = free_course(50.0);
  SolveOptions opts;
  opts.grad_tol = 1e-10;
  const std::vector<Solution> branches = multistart(scn, opts, Scheme::kHeun);
  const VerificationReport r = verify(branches.front(), scn, Scheme::kHeun);
  EXPECT_EQ(r.arc_structure.label, "singular");
  EXPECT_EQ(r.bang_sign_violations, 0);
  EXPECT_LE(r.singular_theta_max_err, 0.02);
  EXPECT_TRUE(r.passed);
}

}  // namespace
}  // namespace obsplan
