#pragma once

#include "ccd/design_io.hpp"
#include "ccd/scenario.hpp"

#include <string>
#include <utility>
#include <vector>

namespace ccd {

/// Bounds-and-optima table in the layout of the design table:
///   C_c  kJ/K  5.0  20.0  <value> [<value> ...]
/// One value column per design, in the given order.
std::string design_table(const Scenario& sc,
                         const std::vector<std::pair<std::string, const StoredDesign*>>& designs);

struct ViolationSummary {
  int count = 0;                // (step, state) pairs outside X
  int T_h_count = 0;
  double max_excess = 0.0;
  double T_h_max_excess = 0.0;
  std::vector<int> steps;       // distinct steps with any violation
};

ViolationSummary summarize_violations(const RolloutResult& r);
std::string format_violations(const ViolationSummary& s);

/// A plotted curve; x and y in data units.
struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool dashed = false;
};

/// Standalone SVG line chart with axes, ticks and a legend. Horizontal
/// reference lines (constraint bounds) are drawn dashed in red.
std::string svg_chart(const std::string& title, const std::string& x_label,
                      const std::string& y_label, const std::vector<Series>& series,
                      const std::vector<double>& bound_lines = {});

/// Charts rebuilt from trajectory CSV text alone: inputs, heater temperature
/// with its bounds, and the disturbance signals.
std::string plot_inputs(const std::string& csv);
std::string plot_heater_temperature(const std::string& csv, double T_h_lower, double T_h_upper);
std::string plot_disturbances(const std::string& csv);

/// Heater temperature of several runs on one chart.
std::string plot_heater_overlay(const std::vector<std::pair<std::string, std::string>>& labelled_csv,
                                double T_h_lower, double T_h_upper);

}  // namespace ccd
