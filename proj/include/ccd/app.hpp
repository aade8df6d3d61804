#pragma once

#include "ccd/design_io.hpp"
#include "ccd/report.hpp"
#include "ccd/scenario.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace ccd {

enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,
  kExitInfeasible = 2,
  kExitViolations = 3,
};

struct RunOptions {
  std::filesystem::path scenario;
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::string perturb = "none";
  std::filesystem::path design;
};

/// Loads the scenario and applies a seed override.
Scenario prepare_scenario(const RunOptions& opt);

DesignResult solve_rccd(const Scenario& sc);
DesignResult solve_olccd(const Scenario& sc);

/// Replays stored schedules against the scenario's nominal profile shifted by
/// the perturbation: closed loop when gains are present, open loop otherwise.
RolloutResult replay_design(const StoredDesign& design, const Scenario& sc,
                            const Perturbation& mode);

/// Writes <alg>_design.json, <alg>_trajectory.csv, the plots and the table
/// report into `out_dir`; returns the stored form.
StoredDesign write_design_outputs(const DesignResult& result, const Scenario& sc,
                                  const std::filesystem::path& out_dir, std::ostream& log);

int run_rccd(const RunOptions& opt, std::ostream& log);
int run_olccd(const RunOptions& opt, std::ostream& log);
int run_replay(const RunOptions& opt, std::ostream& log);
int run_compare(const RunOptions& opt, std::ostream& log);
int run_validate(const RunOptions& opt, std::ostream& log);

}  // namespace ccd
