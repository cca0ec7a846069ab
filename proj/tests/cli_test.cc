#include "commands.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "obsplan/io.h"
#include "support.h"

namespace obsplan::cli {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "obsplan_cli_test" / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream f(path);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

RunManifest manifest(double t_f, const fs::path& out) {
  RunManifest m;
  m.scenario = testing::example(t_f);
  m.out_dir = out;
  return m;
}

TEST(ExampleScenario, IsValid) {
  const Scenario scn = example_scenario();
  EXPECT_NO_THROW(validate(scn));
  EXPECT_EQ(scn.t_f, 100.0);
  EXPECT_DOUBLE_EQ(scn.v, 0.04);
}

TEST(Prepare, RejectsEmptyArtifactSet) {
  RunManifest m = manifest(50.0, scratch_dir("prepare"));
  m.artifacts = {false, false, false, false, false};
  EXPECT_THROW(prepare(m), ValidationError);
}

TEST(Solve, WritesBranchArtifacts) {
  const fs::path out = scratch_dir("solve50");
  RunManifest m = manifest(50.0, out);
  m.artifacts.series_plots = true;
  std::ostringstream o;
  std::ostringstream e;
  ASSERT_EQ(cmd_solve(m, o, e), kOk) << e.str();
  for (const char* name : {"trajectory.csv", "costates.csv", "summary.txt",
                           "path.svg", "course.svg", "switching.svg"}) {
    EXPECT_TRUE(fs::exists(out / "branch_00" / name)) << name;
  }
  EXPECT_TRUE(fs::exists(out / "branch_01" / "summary.txt"));
  EXPECT_TRUE(fs::exists(out / "paths.svg"));
  const std::string summary = slurp(out / "branch_00" / "summary.txt");
  EXPECT_NE(summary.find("objective: 0.03059\n"), std::string::npos)
      << summary;
  EXPECT_NE(summary.find("verification: pass\n"), std::string::npos);
  EXPECT_NE(o.str().find("mirror of branch_00"), std::string::npos);
}

TEST(Solve, InfeasibleScenarioIsInputError) {
  RunManifest m = manifest(50.0, scratch_dir("bad"));
  m.scenario.turn_rate_max = -5.0;
  std::ostringstream o;
  std::ostringstream e;
  EXPECT_EQ(cmd_solve(m, o, e), kInputError);
  EXPECT_NE(e.str().find("turn_rate_max must be positive"), std::string::npos);
}

TEST(Table1, SingletonHorizon) {
  const fs::path out = scratch_dir("table");
  std::ostringstream o;
  std::ostringstream e;
  ASSERT_EQ(cmd_table1(manifest(50.0, out), {50.0}, o, e), kOk) << e.str();
  EXPECT_EQ(slurp(out / "table1.csv"), "t_f_s,global,local\n50,0.03059,\n");
  EXPECT_NE(o.str().find("0.03059"), std::string::npos);
}

TEST(Table1, UsageErrors) {
  std::ostringstream o;
  std::ostringstream e;
  const RunManifest m = manifest(50.0, scratch_dir("table_bad"));
  EXPECT_EQ(cmd_table1(m, {}, o, e), kInputError);
  EXPECT_EQ(cmd_table1(m, {50.0, -1.0}, o, e), kInputError);
}

TEST(SweepP1, RatioToHorizon) {
  const fs::path out = scratch_dir("sweep");
  RunManifest m = manifest(1.0, out);
  m.options.grad_tol = kFreeCourseGradTol;
  std::ostringstream o;
  std::ostringstream e;
  ASSERT_EQ(cmd_sweep_p1(m, {0.1}, o, e), kOk) << e.str();
  const std::string csv = slurp(out / "sweep_p1.csv");
  EXPECT_NE(csv.find("\n0.1,12.5,"), std::string::npos) << csv;
  EXPECT_TRUE(fs::exists(out / "K_0.1" / "trajectory.csv"));
  const std::string summary = slurp(out / "K_0.1" / "summary.txt");
  EXPECT_NE(summary.find("problem: P1"), std::string::npos);
  EXPECT_NE(summary.find("t_f_s: 12.5"), std::string::npos);
}

TEST(SweepP1, RatioOutsideUnitIntervalIsUsageError) {
  std::ostringstream o;
  std::ostringstream e;
  const RunManifest m = manifest(1.0, scratch_dir("sweep_bad"));
  EXPECT_EQ(cmd_sweep_p1(m, {0.0}, o, e), kInputError);
  EXPECT_EQ(cmd_sweep_p1(m, {1.0}, o, e), kInputError);
  EXPECT_EQ(cmd_sweep_p1(m, {}, o, e), kInputError);
}

class VerifyStored : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = scratch_dir("verify");
    RunManifest m = manifest(50.0, dir_);
    std::ostringstream o;
    std::ostringstream e;
    ASSERT_EQ(cmd_solve(m, o, e), kOk) << e.str();
  }
  static fs::path trajectory() { return dir_ / "branch_00" / "trajectory.csv"; }
  static inline fs::path dir_;
};

TEST_F(VerifyStored, FreshBranchPasses) {
  std::ostringstream o;
  std::ostringstream e;
  EXPECT_EQ(cmd_verify(testing::example(50.0), Scheme::kHeun, trajectory(), {},
                       o, e),
            kOk)
      << o.str() << e.str();
  EXPECT_NE(o.str().find("passed: yes"), std::string::npos);
  EXPECT_NE(o.str().find("objective_relative_difference: 0\n"),
            std::string::npos)
      << o.str();
}

TEST_F(VerifyStored, CorruptedControlFails) {
  std::istringstream in(slurp(trajectory()));
  std::ostringstream corrupted;
  std::string line;
  std::getline(in, line);
  corrupted << line << '\n';
  for (int row = 0; std::getline(in, line); ++row) {
    if (row < 100) {
      // Halve the turn rate in the fifth column.
      std::vector<std::string> f;
      std::stringstream ls(line);
      for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
      f[4] = format_exact(std::stod(f[4]) * 0.5);
      for (std::size_t i = 0; i < f.size(); ++i) {
        corrupted << (i ? "," : "") << f[i];
      }
      corrupted << '\n';
    } else {
      corrupted << line << '\n';
    }
  }
  const fs::path path = dir_ / "corrupted.csv";
  std::ofstream(path) << corrupted.str();

  std::ostringstream o;
  std::ostringstream e;
  EXPECT_EQ(cmd_verify(testing::example(50.0), Scheme::kHeun, path, {}, o, e),
            kSolverFailure);
  EXPECT_EQ(o.str().find("bang_sign_violations: 0\n"), std::string::npos)
      << o.str();
}

TEST_F(VerifyStored, InputErrors) {
  std::ostringstream o;
  std::ostringstream e;
  const fs::path empty = dir_ / "empty.csv";
  std::ofstream(empty).flush();
  EXPECT_EQ(cmd_verify(testing::example(50.0), Scheme::kHeun, empty, {}, o, e),
            kInputError);
  EXPECT_NE(e.str().find("empty trajectory file"), std::string::npos);
  EXPECT_EQ(cmd_verify(testing::example(50.0), Scheme::kHeun,
                       dir_ / "missing.csv", {}, o, e),
            kInputError);
  // Horizon in the scenario disagrees with the file.
  EXPECT_EQ(cmd_verify(testing::example(60.0), Scheme::kHeun, trajectory(), {},
                       o, e),
            kInputError);
}

}  // namespace
}  // namespace obsplan::cli
