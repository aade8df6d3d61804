#pragma once

#include "ccd/rccd.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ccd {

inline constexpr const char* kTrajectoryCsvHeader =
    "k,t,M_f,M_r,T_h,T_c,T_r,mdot_f,mdot_r,Qdot_h,T_s,mdot_e,h_k";

/// One trajectory CSV row. Row k holds x_k and, for k <= n_t, the input,
/// disturbance and rMPC verdict of step k; the final row carries the state
/// only. Missing cells stay empty.
struct TrajectoryRow {
  int k = 0;
  double t = 0.0;
  std::array<double, kStates> x{};
  std::optional<std::array<double, kInputs>> u;
  std::optional<std::array<double, kDisturbances>> d;
  std::optional<int> h;

  bool operator==(const TrajectoryRow&) const = default;
};

struct TrajectoryTable {
  std::vector<TrajectoryRow> rows;

  bool operator==(const TrajectoryTable&) const = default;
};

TrajectoryTable make_trajectory_table(const RolloutResult& r,
                                      const DisturbanceProfile& profile);
std::string trajectory_to_csv(const TrajectoryTable& table);
TrajectoryTable trajectory_from_csv(const std::string& text);

/// The persisted part of a DesignResult: everything `replay` needs.
struct StoredDesign {
  std::string algorithm;
  std::string scenario;
  DesignVector design;
  double J_sys = kInf;
  bool feasible = false;
  double constraint_violation = 0.0;
  Schedules schedules;  // empty K_star for the open-loop baseline
  std::string trajectory_csv;
  int evaluations = 0;
};

StoredDesign to_stored(const DesignResult& result, const std::string& scenario,
                       const std::string& trajectory_csv);
std::string design_to_json(const StoredDesign& design);
StoredDesign design_from_json(const std::string& text);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace ccd
