// Drives the ccd_cli executable end to end and checks exit codes and files.

#include "ccd/design_io.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(CCD_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(CCD_TEST_TMP) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const std::string kSmoke = std::string(CCD_SCENARIO_DIR) + "/smoke.json";

}  // namespace

TEST(Cli, ValidateShippedScenarios) {
  for (const char* name : {"smoke.json", "paper_like.json", "overload.json"}) {
    EXPECT_EQ(run("validate --scenario " + std::string(CCD_SCENARIO_DIR) + "/" + name), 0) << name;
  }
}

TEST(Cli, BadScenarioIsError) {
  const fs::path dir = scratch("bad");
  ccd::write_text(dir / "bad.json", R"({"name": "x", "mission": {"t_f": 100, "tau_s": 0.3}})");
  EXPECT_EQ(run("validate --scenario " + (dir / "bad.json").string()), 1);
  EXPECT_EQ(run("rccd"), 1);
}

TEST(Cli, RccdRunIsReproducibleAndReplays) {
  const fs::path a = scratch("rccd_a");
  const fs::path b = scratch("rccd_b");
  ASSERT_EQ(run("rccd --scenario " + kSmoke + " --seed 3 --out " + a.string()), 0);
  ASSERT_EQ(run("rccd --scenario " + kSmoke + " --seed 3 --out " + b.string()), 0);
  for (const char* f : {"rccd_trajectory.csv", "rccd_design.json", "rccd_report.txt",
                        "rccd_inputs.svg", "rccd_T_h.svg", "run.log"}) {
    EXPECT_TRUE(fs::exists(a / f)) << f;
  }
  EXPECT_EQ(ccd::read_text(a / "rccd_trajectory.csv"), ccd::read_text(b / "rccd_trajectory.csv"));
  EXPECT_EQ(ccd::read_text(a / "rccd_design.json"), ccd::read_text(b / "rccd_design.json"));

  const fs::path r = scratch("rccd_replay");
  EXPECT_EQ(run("replay --scenario " + kSmoke + " --design " + (a / "rccd_design.json").string() +
                " --perturb none --out " + r.string()),
            0);
  EXPECT_TRUE(fs::exists(r / "rccd_replay_none.csv"));
  EXPECT_TRUE(fs::exists(r / "rccd_replay_none_T_h.svg"));
}

TEST(Cli, OpenLoopDesignViolatesUnderUpperVertex) {
  const fs::path a = scratch("ol");
  ASSERT_EQ(run("olccd --scenario " + kSmoke + " --out " + a.string()), 0);
  EXPECT_EQ(run("replay --scenario " + kSmoke + " --design " + (a / "olccd_design.json").string() +
                " --perturb vertex_hi --out " + a.string()),
            3);
}

TEST(Cli, OverloadExitsInfeasible) {
  const fs::path a = scratch("overload");
  EXPECT_EQ(run("rccd --scenario " + std::string(CCD_SCENARIO_DIR) + "/overload.json --out " +
                a.string()),
            2);
  const std::string log = ccd::read_text(a / "run.log");
  EXPECT_NE(log.find("first_infeasible_k = "), std::string::npos);
}

TEST(Cli, ReplayLengthMismatchIsError) {
  const fs::path a = scratch("mismatch");
  ASSERT_EQ(run("rccd --scenario " + kSmoke + " --out " + a.string()), 0);
  EXPECT_EQ(run("replay --scenario " + std::string(CCD_SCENARIO_DIR) + "/paper_like.json --design " +
                (a / "rccd_design.json").string() + " --out " + a.string()),
            1);
}
