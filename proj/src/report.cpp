#include "ccd/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace ccd {

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

struct TableRow {
  const char* name;
  const char* unit;
  int index;     // into DesignVector::to_vec()
  int decimals;  // bound columns
};

constexpr TableRow kRows[] = {
    {"C_c", "kJ/K", 0, 1},   {"C_h", "kJ/K", 1, 1},     {"R_s", "K/kW", 3, 1},
    {"T_f", "C", 2, 1},      {"M_f0", "kg", 4, 2},      {"M_r0", "kg", 5, 2},
    {"T_h0", "C", 6, 1},     {"T_c0", "C", 7, 1},       {"T_r0", "C", 8, 1},
    {"mdot_f0", "kg/s", 9, 4}, {"mdot_r0", "kg/s", 10, 4},
};

}  // namespace

std::string design_table(const Scenario& sc,
                         const std::vector<std::pair<std::string, const StoredDesign*>>& designs) {
  std::ostringstream os;
  os << "variable  units  lower  upper";
  for (const auto& [label, d] : designs) os << "  " << label;
  os << "\n";
  for (const TableRow& row : kRows) {
    os << row.name << "  " << row.unit << "  "
       << fixed(sc.bounds.box.lower(row.index), row.decimals) << "  "
       << fixed(sc.bounds.box.upper(row.index), row.decimals);
    for (const auto& [label, d] : designs) {
      os << "  " << fixed(d->design.to_vec()(row.index), row.decimals + 2);
    }
    os << "\n";
  }
  os << "J_sys  kg  -  -";
  for (const auto& [label, d] : designs) os << "  " << fixed(d->J_sys, 4);
  os << "\n";
  return os.str();
}

ViolationSummary summarize_violations(const RolloutResult& r) {
  ViolationSummary s;
  std::set<int> steps;
  for (const auto& v : r.violations) {
    ++s.count;
    s.max_excess = std::max(s.max_excess, v.excess);
    if (v.state == kIndexTh) {
      ++s.T_h_count;
      s.T_h_max_excess = std::max(s.T_h_max_excess, v.excess);
    }
    steps.insert(v.k);
  }
  s.steps.assign(steps.begin(), steps.end());
  return s;
}

std::string format_violations(const ViolationSummary& s) {
  std::ostringstream os;
  char buf[96];
  std::snprintf(buf, sizeof buf, ", max excess %.4g (T_h: %.4g)", s.max_excess,
                s.T_h_max_excess);
  os << "violations: " << s.count << " (T_h: " << s.T_h_count << ")" << buf;
  if (!s.steps.empty()) {
    os << ", steps";
    for (int k : s.steps) os << " " << k;
  }
  return os.str();
}

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 360.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 160.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

double nice_step(double span, int target) {
  const double raw = span / std::max(1, target);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double f : {1.0, 2.0, 5.0, 10.0}) {
    if (f * mag >= raw) return f * mag;
  }
  return 10.0 * mag;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) { return fixed(v, 2); }

}  // namespace

std::string svg_chart(const std::string& title, const std::string& x_label,
                      const std::string& y_label, const std::vector<Series>& series,
                      const std::vector<double>& bound_lines) {
  double x0 = kInf, x1 = -kInf, y0 = kInf, y1 = -kInf;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  for (double b : bound_lines) {
    if (!std::isfinite(b)) continue;
    y0 = std::min(y0, b);
    y1 = std::max(y1, b);
  }
  if (!(x0 <= x1)) { x0 = 0.0; x1 = 1.0; }
  if (!(y0 <= y1)) { y0 = 0.0; y1 = 1.0; }
  if (x1 - x0 < 1e-12) x1 = x0 + 1.0;
  if (y1 - y0 < 1e-12) { y0 -= 0.5; y1 += 0.5; }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + (y1 - y) / (y1 - y0) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(title) << "</text>\n";

  // Axes and ticks.
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  const double xs = nice_step(x1 - x0, 8);
  for (double t = std::ceil(x0 / xs) * xs; t <= x1 + 1e-9 * xs; t += xs) {
    os << "<line x1=\"" << num(px(t)) << "\" y1=\"" << kTop + ph << "\" x2=\"" << num(px(t))
       << "\" y2=\"" << kTop + ph + 5 << "\" stroke=\"black\"/>";
    os << "<text x=\"" << num(px(t)) << "\" y=\"" << kTop + ph + 18
       << "\" text-anchor=\"middle\">" << format_number(std::round(t / xs) * xs) << "</text>\n";
  }
  const double ys = nice_step(y1 - y0, 6);
  for (double t = std::ceil(y0 / ys) * ys; t <= y1 + 1e-9 * ys; t += ys) {
    const double tv = std::abs(t) < 1e-9 * ys ? 0.0 : t;
    os << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << num(py(t)) << "\" x2=\"" << kLeft
       << "\" y2=\"" << num(py(t)) << "\" stroke=\"black\"/>";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", tv);
    os << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(py(t) + 4)
       << "\" text-anchor=\"end\">" << buf << "</text>\n";
  }
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 10
     << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
  os << "<text transform=\"translate(16," << kTop + ph / 2
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(y_label) << "</text>\n";

  for (double b : bound_lines) {
    if (!std::isfinite(b)) continue;
    os << "<line x1=\"" << kLeft << "\" y1=\"" << num(py(b)) << "\" x2=\"" << kLeft + pw
       << "\" y2=\"" << num(py(b)) << "\" stroke=\"red\" stroke-dasharray=\"6,4\"/>\n";
  }

  double legend_y = kTop + 10;
  for (const auto& s : series) {
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
    if (s.dashed) os << " stroke-dasharray=\"4,3\"";
    os << " points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      os << num(px(s.x[i])) << "," << num(py(s.y[i])) << " ";
    }
    os << "\"/>\n";
    os << "<line x1=\"" << kWidth - kRight + 10 << "\" y1=\"" << legend_y << "\" x2=\""
       << kWidth - kRight + 34 << "\" y2=\"" << legend_y << "\" stroke=\"" << s.color
       << "\" stroke-width=\"1.5\"" << (s.dashed ? " stroke-dasharray=\"4,3\"" : "") << "/>";
    os << "<text x=\"" << kWidth - kRight + 40 << "\" y=\"" << legend_y + 4 << "\">"
       << escape(s.label) << "</text>\n";
    legend_y += 18;
  }
  os << "</svg>\n";
  return os.str();
}

namespace {

// Columns of the trajectory CSV used by the plots.
enum Column { kColT = 1, kColTh = 4, kColMf = 7, kColMr = 8, kColQ = 9, kColTs = 10, kColMe = 11 };

double cell(const TrajectoryRow& r, int col) {
  switch (col) {
    case kColT: return r.t;
    case kColTh: return r.x[2];
    case kColMf: return r.u ? (*r.u)[0] : NAN;
    case kColMr: return r.u ? (*r.u)[1] : NAN;
    case kColQ: return r.d ? (*r.d)[0] : NAN;
    case kColTs: return r.d ? (*r.d)[1] : NAN;
    case kColMe: return r.d ? (*r.d)[2] : NAN;
  }
  return NAN;
}

/// Zero-order-hold staircase of a per-step signal.
Series step_series(const TrajectoryTable& t, int col, std::string label, std::string color,
                   double scale = 1.0) {
  Series s{std::move(label), {}, {}, std::move(color), false};
  for (std::size_t i = 0; i + 1 < t.rows.size(); ++i) {
    const double v = cell(t.rows[i], col) * scale;
    if (!std::isfinite(v)) continue;
    s.x.push_back(t.rows[i].t);
    s.y.push_back(v);
    s.x.push_back(t.rows[i + 1].t);
    s.y.push_back(v);
  }
  return s;
}

Series state_series(const TrajectoryTable& t, int col, std::string label, std::string color) {
  Series s{std::move(label), {}, {}, std::move(color), false};
  for (const auto& r : t.rows) {
    s.x.push_back(r.t);
    s.y.push_back(cell(r, col));
  }
  return s;
}

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::string plot_inputs(const std::string& csv) {
  const TrajectoryTable t = trajectory_from_csv(csv);
  return svg_chart("Control inputs", "time (s)", "mass flow (g/s)",
                   {step_series(t, kColMf, "mdot_f", kPalette[0], 1000.0),
                    step_series(t, kColMr, "mdot_r", kPalette[2], 1000.0)});
}

std::string plot_heater_temperature(const std::string& csv, double T_h_lower, double T_h_upper) {
  const TrajectoryTable t = trajectory_from_csv(csv);
  return svg_chart("Heater temperature", "time (s)", "T_h (C)",
                   {state_series(t, kColTh, "T_h", kPalette[0])}, {T_h_lower, T_h_upper});
}

std::string plot_disturbances(const std::string& csv) {
  const TrajectoryTable t = trajectory_from_csv(csv);
  return svg_chart("Disturbances", "time (s)", "Qdot_h (kW), mdot_e (g/s)",
                   {step_series(t, kColQ, "Qdot_h", kPalette[1]),
                    step_series(t, kColMe, "mdot_e x1000", kPalette[3], 1000.0)});
}

std::string plot_heater_overlay(const std::vector<std::pair<std::string, std::string>>& labelled_csv,
                                double T_h_lower, double T_h_upper) {
  std::vector<Series> series;
  std::size_t i = 0;
  for (const auto& [label, csv] : labelled_csv) {
    Series s = state_series(trajectory_from_csv(csv), kColTh, label,
                            kPalette[i % (sizeof kPalette / sizeof kPalette[0])]);
    s.dashed = i % 2 == 1;
    series.push_back(std::move(s));
    ++i;
  }
  return svg_chart("Heater temperature", "time (s)", "T_h (C)", series, {T_h_lower, T_h_upper});
}

}  // namespace ccd
