#pragma once

#include "ccd/olccd.hpp"
#include "ccd/rccd.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ccd {

class ParseError : public CcdError {
 public:
  using CcdError::CcdError;
};

/// Raised for a well-formed document that breaks a constraint; the message
/// starts with the offending field path.
class ValidationError : public CcdError {
 public:
  ValidationError(const std::string& field, const std::string& what)
      : CcdError(field + ": " + what), field(field) {}
  std::string field;
};

/// One design study: mission, bounds, sets, nominal profile and solver
/// settings.
struct Scenario {
  std::string name;
  std::string description;
  std::filesystem::path source;
  double t_f = 0.0;
  double tau_s = 1.0;
  std::uint64_t seed = 1;
  bool stand_in_profile = false;  // synthetic profile, not measured data

  ProblemSetup setup;
  DesignBounds bounds;
  DesignVector initial;
  PatternSearchOptions rccd;
  AugLagOptions olccd;

  /// One line per default that was filled in while loading.
  std::vector<std::string> defaults_applied;

  int steps() const { return setup.steps(); }
  /// Bounds of the nine plant and initial-state entries (open-loop solver).
  BoxSet plant_state_bounds() const;
};

Scenario parse_scenario(const std::string& text,
                        const std::filesystem::path& base_dir = ".");
Scenario load_scenario(const std::filesystem::path& path);

/// Overrides the scenario seed everywhere randomness is drawn from it.
void apply_seed(Scenario& sc, std::uint64_t seed);

/// Human-readable dump of the resolved settings, defaults included.
std::string describe(const Scenario& sc);

}  // namespace ccd
