#pragma once

#include "ccd/plant.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ccd {

/// Sampled exogenous inputs over a mission. Step indices are 1-based: sample
/// k holds over [t_k, t_{k+1}) with t_k = (k - 1) * sample_period.
class DisturbanceProfile {
 public:
  DisturbanceProfile() = default;
  DisturbanceProfile(std::vector<Disturbance> samples, double sample_period);

  int size() const { return static_cast<int>(samples_.size()); }
  double sample_period() const { return sample_period_; }
  const std::vector<Disturbance>& samples() const { return samples_; }

  /// 1-based access.
  const Disturbance& at(int k) const;
  /// 1-based access that holds the last sample past the end of the mission.
  const Disturbance& at_or_last(int k) const;

  bool operator==(const DisturbanceProfile&) const = default;

 private:
  std::vector<Disturbance> samples_;
  double sample_period_ = 1.0;
};

inline bool operator==(const Disturbance& a, const Disturbance& b) {
  return a.Qdot_h == b.Qdot_h && a.T_s == b.T_s && a.mdot_e == b.mdot_e;
}

struct Perturbation {
  enum class Kind { None, VertexHi, VertexLo, Random };
  Kind kind = Kind::None;
  std::uint64_t seed = 0;

  static Perturbation none() { return {}; }
  static Perturbation vertex_hi() { return {Kind::VertexHi, 0}; }
  static Perturbation vertex_lo() { return {Kind::VertexLo, 0}; }
  static Perturbation random(std::uint64_t seed) { return {Kind::Random, seed}; }

  /// Parses "none", "vertex_hi", "vertex_lo", "random" or "random:<seed>".
  static Perturbation parse(const std::string& text, std::uint64_t default_seed);
  std::string name() const;
};

/// Returns d_k + w_k for every step, with w_k drawn from `w_box` per `mode`.
DisturbanceProfile perturb_profile(const DisturbanceProfile& nominal,
                                   const BoxSet& w_box, const Perturbation& mode);

/// Square pulse on top of a baseline, active on [start, end) seconds.
struct Pulse {
  double start = 0.0;
  double end = 0.0;
  double value = 0.0;
};

/// Stand-in load profile: baseline heat load with square pulses, constant sink
/// temperature and piecewise-constant exit flow. Not measured data.
struct PulsedProfileSpec {
  double Qdot_base = 0.5;
  std::vector<Pulse> Qdot_pulses;
  double T_s = 10.0;
  double mdot_e_base = 0.0;
  std::vector<Pulse> mdot_e_pulses;
};

DisturbanceProfile make_pulsed_profile(const PulsedProfileSpec& spec, double t_f,
                                       double tau_s);

inline constexpr const char* kProfileCsvHeader = "k,Qdot_h_kW,T_s_C,mdot_e_kgps";

std::string profile_to_csv(const DisturbanceProfile& profile);
DisturbanceProfile profile_from_csv(const std::string& text, double sample_period);
DisturbanceProfile load_profile_csv(const std::filesystem::path& path,
                                    double sample_period);
void save_profile_csv(const DisturbanceProfile& profile,
                      const std::filesystem::path& path);

/// Shortest decimal text that reads back to the same double.
std::string format_number(double value);

}  // namespace ccd
