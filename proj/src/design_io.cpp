#include "ccd/design_io.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace ccd {

using nlohmann::json;

TrajectoryTable make_trajectory_table(const RolloutResult& r,
                                      const DisturbanceProfile& profile) {
  TrajectoryTable table;
  const double tau = profile.sample_period();
  for (std::size_t i = 0; i < r.trajectory.size(); ++i) {
    TrajectoryRow row;
    row.k = static_cast<int>(i) + 1;
    row.t = static_cast<double>(i) * tau;
    const StateVec x = r.trajectory[i].vec();
    for (int s = 0; s < kStates; ++s) row.x[static_cast<std::size_t>(s)] = x(s);
    if (i < r.applied_u.size()) {
      row.u = {r.applied_u[i].mdot_f, r.applied_u[i].mdot_r};
    }
    if (row.k <= profile.size() && i + 1 < r.trajectory.size()) {
      const Disturbance& d = profile.at(row.k);
      row.d = {d.Qdot_h, d.T_s, d.mdot_e};
    }
    if (i < r.h.size()) row.h = r.h[i];
    table.rows.push_back(row);
  }
  return table;
}

std::string trajectory_to_csv(const TrajectoryTable& table) {
  std::string out = kTrajectoryCsvHeader;
  out += '\n';
  for (const auto& row : table.rows) {
    out += std::to_string(row.k);
    out += ',' + format_number(row.t);
    for (double v : row.x) out += ',' + format_number(v);
    for (int i = 0; i < kInputs; ++i) {
      out += ',';
      if (row.u) out += format_number((*row.u)[static_cast<std::size_t>(i)]);
    }
    for (int i = 0; i < kDisturbances; ++i) {
      out += ',';
      if (row.d) out += format_number((*row.d)[static_cast<std::size_t>(i)]);
    }
    out += ',';
    if (row.h) out += std::to_string(*row.h);
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& s, int line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw CcdError("trajectory CSV line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

TrajectoryTable trajectory_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kTrajectoryCsvHeader) {
    throw CcdError("trajectory CSV: header must be " + std::string(kTrajectoryCsvHeader));
  }
  TrajectoryTable table;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 13) {
      throw CcdError("trajectory CSV line " + std::to_string(lineno) + ": expected 13 cells");
    }
    TrajectoryRow row;
    row.k = static_cast<int>(parse_double(c[0], lineno));
    row.t = parse_double(c[1], lineno);
    for (int s = 0; s < kStates; ++s) {
      row.x[static_cast<std::size_t>(s)] = parse_double(c[2 + static_cast<std::size_t>(s)], lineno);
    }
    if (!c[7].empty() || !c[8].empty()) {
      row.u = {parse_double(c[7], lineno), parse_double(c[8], lineno)};
    }
    if (!c[9].empty() || !c[10].empty() || !c[11].empty()) {
      row.d = {parse_double(c[9], lineno), parse_double(c[10], lineno),
               parse_double(c[11], lineno)};
    }
    if (!c[12].empty()) row.h = static_cast<int>(parse_double(c[12], lineno));
    table.rows.push_back(row);
  }
  return table;
}

StoredDesign to_stored(const DesignResult& result, const std::string& scenario,
                       const std::string& trajectory_csv) {
  StoredDesign s;
  s.algorithm = result.algorithm;
  s.scenario = scenario;
  s.design = result.design;
  s.J_sys = result.J_sys;
  s.feasible = result.rollout.feasible;
  s.constraint_violation = result.constraint_violation;
  s.schedules = result.rollout.schedules;
  s.trajectory_csv = trajectory_csv;
  s.evaluations = result.trace.evaluations;
  return s;
}

namespace {

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vec json_vec(const json& a) {
  Vec v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
  return v;
}

}  // namespace

std::string design_to_json(const StoredDesign& d) {
  json j;
  j["algorithm"] = d.algorithm;
  j["scenario"] = d.scenario;
  j["J_sys"] = d.J_sys;
  j["feasible"] = d.feasible;
  j["constraint_violation"] = d.constraint_violation;
  j["evaluations"] = d.evaluations;
  j["p"] = {{"C_c", d.design.p.C_c}, {"C_h", d.design.p.C_h}, {"T_f", d.design.p.T_f},
            {"R_s", d.design.p.R_s}, {"c_p", d.design.p.c_p}};
  j["x0"] = {{"M_f", d.design.x0.M_f}, {"M_r", d.design.x0.M_r}, {"T_h", d.design.x0.T_h},
             {"T_c", d.design.x0.T_c}, {"T_r", d.design.x0.T_r}};
  j["u0"] = {{"mdot_f", d.design.u0.mdot_f}, {"mdot_r", d.design.u0.mdot_r}};

  json steps = json::array();
  const Schedules& s = d.schedules;
  for (int k = 0; k < s.size(); ++k) {
    const auto i = static_cast<std::size_t>(k);
    json step;
    step["k"] = k + 1;
    step["c"] = vec_json(s.C_star[i]);
    if (s.has_gains()) {
      const Mat& K = s.K_star[i];
      json rows = json::array();  // row-major
      for (Eigen::Index r = 0; r < K.rows(); ++r) {
        for (Eigen::Index c = 0; c < K.cols(); ++c) rows.push_back(K(r, c));
      }
      step["K"] = rows;
      step["x_e"] = vec_json(s.x_e[i]);
      step["u_e"] = vec_json(s.u_e[i]);
    }
    steps.push_back(step);
  }
  j["schedule"] = {{"gain_rows", s.has_gains() ? kInputs : 0},
                   {"gain_cols", s.has_gains() ? kReducedStates : 0},
                   {"steps", steps}};
  j["trajectory_csv"] = d.trajectory_csv;
  return j.dump(2) + "\n";
}

StoredDesign design_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw CcdError(std::string("design file is not valid JSON: ") + e.what());
  }
  try {
    StoredDesign d;
    d.algorithm = j.at("algorithm").get<std::string>();
    d.scenario = j.value("scenario", "");
    d.J_sys = j.at("J_sys").get<double>();
    d.feasible = j.at("feasible").get<bool>();
    d.constraint_violation = j.value("constraint_violation", 0.0);
    d.evaluations = j.value("evaluations", 0);
    const json& p = j.at("p");
    d.design.p = {p.at("C_c").get<double>(), p.at("C_h").get<double>(),
                  p.at("T_f").get<double>(), p.at("R_s").get<double>(),
                  p.at("c_p").get<double>()};
    const json& x = j.at("x0");
    d.design.x0 = {x.at("M_f").get<double>(), x.at("M_r").get<double>(),
                   x.at("T_h").get<double>(), x.at("T_c").get<double>(),
                   x.at("T_r").get<double>()};
    const json& u = j.at("u0");
    d.design.u0 = {u.at("mdot_f").get<double>(), u.at("mdot_r").get<double>()};

    const json& sched = j.at("schedule");
    const int rows = sched.at("gain_rows").get<int>();
    const int cols = sched.at("gain_cols").get<int>();
    for (const json& step : sched.at("steps")) {
      d.schedules.C_star.push_back(json_vec(step.at("c")));
      if (rows > 0) {
        const Vec flat = json_vec(step.at("K"));
        if (flat.size() != rows * cols) throw CcdError("design file: gain has wrong size");
        Mat K(rows, cols);
        for (int r = 0; r < rows; ++r) {
          for (int c = 0; c < cols; ++c) K(r, c) = flat(r * cols + c);
        }
        d.schedules.K_star.push_back(K);
        d.schedules.x_e.push_back(json_vec(step.at("x_e")));
        d.schedules.u_e.push_back(json_vec(step.at("u_e")));
      }
    }
    d.trajectory_csv = j.value("trajectory_csv", "");
    return d;
  } catch (const json::exception& e) {
    throw CcdError(std::string("design file: ") + e.what());
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CcdError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CcdError("cannot write " + path.string());
  out << text;
  if (!out) throw CcdError("error while writing " + path.string());
}

}  // namespace ccd
