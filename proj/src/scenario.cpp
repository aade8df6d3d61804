#include "ccd/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ccd {

using nlohmann::json;

BoxSet Scenario::plant_state_bounds() const {
  return BoxSet(bounds.box.lower.head(9), bounds.box.upper.head(9));
}

namespace {

const char* const kDesignNames[DesignVector::kSize] = {
    "C_c", "C_h", "T_f", "R_s", "M_f0", "M_r0", "T_h0", "T_c0", "T_r0", "mdot_f0", "mdot_r0"};
const char* const kStateNames[kStates] = {"M_f", "M_r", "T_h", "T_c", "T_r"};
const char* const kInputNames[kInputs] = {"mdot_f", "mdot_r"};
const char* const kDistNames[kDisturbances] = {"Qdot_h", "T_s", "mdot_e"};

std::string join(const std::string& a, const std::string& b) {
  return a.empty() ? b : a + "." + b;
}

/// Object view that remembers which keys were consumed, so stray keys
/// (usually typos) can be reported.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  std::string path(const std::string& key) const { return join(path_, key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  Node child(const std::string& key) { return Node(raw(key), path(key)); }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) throw ValidationError(path(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ValidationError(path(key), "must be finite");
    return x;
  }
  double number(const std::string& key, double def) {
    seen_.insert(key);
    return has(key) ? number(key) : def;
  }
  int integer(const std::string& key, int def) {
    seen_.insert(key);
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_number_integer()) throw ValidationError(path(key), "expected an integer");
    return v.get<int>();
  }
  bool boolean(const std::string& key, bool def) {
    seen_.insert(key);
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_boolean()) throw ValidationError(path(key), "expected true or false");
    return v.get<bool>();
  }
  std::string text(const std::string& key, const std::string& def) {
    seen_.insert(key);
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_string()) throw ValidationError(path(key), "expected a string");
    return v.get<std::string>();
  }

  /// [lower, upper]; null entries mean unbounded on that side.
  std::pair<double, double> interval(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array() || v.size() != 2) {
      throw ValidationError(path(key), "expected [lower, upper]");
    }
    auto side = [&](const json& e, double inf) {
      if (e.is_null()) return inf;
      if (!e.is_number()) throw ValidationError(path(key), "bounds must be numbers or null");
      return e.get<double>();
    };
    const double lo = side(v[0], -kInf);
    const double hi = side(v[1], kInf);
    if (std::isnan(lo) || std::isnan(hi)) throw ValidationError(path(key), "bound is NaN");
    if (lo > hi) {
      std::ostringstream os;
      os << "inverted bounds (lower " << lo << " > upper " << hi << ")";
      throw ValidationError(path(key), os.str());
    }
    return {lo, hi};
  }

  Vec vector(const std::string& key, int n) {
    const json& v = raw(key);
    if (!v.is_array() || static_cast<int>(v.size()) != n) {
      throw ValidationError(path(key), "expected an array of " + std::to_string(n) + " numbers");
    }
    Vec out(n);
    for (int i = 0; i < n; ++i) {
      if (!v[static_cast<std::size_t>(i)].is_number()) {
        throw ValidationError(path(key), "expected an array of numbers");
      }
      out(i) = v[static_cast<std::size_t>(i)].get<double>();
    }
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ValidationError(path(it.key()), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<Pulse> read_pulses(Node& n, const std::string& key) {
  std::vector<Pulse> out;
  if (!n.has(key)) {
    n.text(key, "");  // mark as seen when null
    return out;
  }
  const json& v = n.raw(key);
  if (!v.is_array()) throw ValidationError(n.path(key), "expected a list of [start, end, value]");
  for (std::size_t i = 0; i < v.size(); ++i) {
    const json& e = v[i];
    const std::string where = n.path(key) + "[" + std::to_string(i) + "]";
    if (!e.is_array() || e.size() != 3 || !e[0].is_number() || !e[1].is_number() ||
        !e[2].is_number()) {
      throw ValidationError(where, "expected [start, end, value]");
    }
    Pulse p{e[0].get<double>(), e[1].get<double>(), e[2].get<double>()};
    if (p.end < p.start) throw ValidationError(where, "pulse ends before it starts");
    out.push_back(p);
  }
  return out;
}

DisturbanceProfile read_profile(Node n, const Scenario& sc,
                                const std::filesystem::path& base_dir, bool& stand_in) {
  stand_in = n.boolean("stand_in", false);
  const int kinds = int(n.has("csv")) + int(n.has("pulsed")) + int(n.has("samples"));
  if (kinds != 1) {
    throw ValidationError(n.path("csv"),
                          "profile needs exactly one of csv, pulsed or samples");
  }
  DisturbanceProfile D;
  if (n.has("csv")) {
    const std::filesystem::path file = base_dir / n.text("csv", "");
    if (!std::filesystem::exists(file)) {
      throw ValidationError(n.path("csv"), "file " + file.string() + " does not exist");
    }
    try {
      D = load_profile_csv(file, sc.tau_s);
    } catch (const std::exception& e) {
      throw ValidationError(n.path("csv"), e.what());
    }
  } else if (n.has("pulsed")) {
    Node p = n.child("pulsed");
    PulsedProfileSpec spec;
    spec.Qdot_base = p.number("Qdot_base");
    spec.Qdot_pulses = read_pulses(p, "Qdot_pulses");
    spec.T_s = p.number("T_s");
    spec.mdot_e_base = p.number("mdot_e_base", 0.0);
    spec.mdot_e_pulses = read_pulses(p, "mdot_e_pulses");
    p.finish();
    D = make_pulsed_profile(spec, sc.t_f, sc.tau_s);
  } else {
    const json& v = n.raw("samples");
    if (!v.is_array()) throw ValidationError(n.path("samples"), "expected [[Qdot_h, T_s, mdot_e], ...]");
    std::vector<Disturbance> samples;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const json& e = v[i];
      if (!e.is_array() || e.size() != 3 || !e[0].is_number() || !e[1].is_number() ||
          !e[2].is_number()) {
        throw ValidationError(n.path("samples") + "[" + std::to_string(i) + "]",
                              "expected [Qdot_h, T_s, mdot_e]");
      }
      samples.push_back({e[0].get<double>(), e[1].get<double>(), e[2].get<double>()});
    }
    D = DisturbanceProfile(std::move(samples), sc.tau_s);
  }
  n.finish();
  return D;
}

std::string format_interval(double lo, double hi) {
  auto side = [](double v) { return std::isfinite(v) ? format_number(v) : std::string("null"); };
  return "[" + side(lo) + ", " + side(hi) + "]";
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario is not valid JSON: ") + e.what());
  }
  Node root(doc, "");
  Scenario sc;
  sc.name = root.text("name", "unnamed");
  sc.description = root.text("description", "");

  {
    Node m = root.child("mission");
    sc.t_f = m.number("t_f");
    sc.tau_s = m.number("tau_s");
    m.finish();
    if (!(sc.t_f > 0.0)) throw ValidationError("mission.t_f", "must be positive");
    if (!(sc.tau_s > 0.0)) throw ValidationError("mission.tau_s", "must be positive");
    const double n = sc.t_f / sc.tau_s;
    if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n)) {
      throw ValidationError("mission.tau_s", "t_f / tau_s = " + format_number(n) +
                                                 " is not an integer step count");
    }
  }
  if (root.has("seed")) {
    const json& s = root.raw("seed");
    if (!s.is_number_unsigned()) throw ValidationError("seed", "expected a non-negative integer");
    sc.seed = s.get<std::uint64_t>();
  } else {
    root.text("seed", "");
    sc.defaults_applied.push_back("seed: absent, using 1");
  }
  sc.setup.c_p = root.number("c_p", kWaterCp);
  if (!(sc.setup.c_p > 0.0)) throw ValidationError("c_p", "must be positive");
  sc.setup.n_sub = root.integer("n_sub", 10);
  if (sc.setup.n_sub < 1) throw ValidationError("n_sub", "must be at least 1");

  if (!root.has("profile")) throw ValidationError("profile", "missing nominal disturbance profile");
  sc.setup.profile = read_profile(root.child("profile"), sc, base_dir, sc.stand_in_profile);
  const int n_t = static_cast<int>(std::lround(sc.t_f / sc.tau_s));
  if (sc.setup.profile.size() != n_t) {
    throw ValidationError("profile", "has " + std::to_string(sc.setup.profile.size()) +
                                         " samples but the mission needs " + std::to_string(n_t));
  }

  // Input box first: it is the default range of the initial-input bounds.
  BoxSet u_box(Eigen::Vector2d(0.0, 0.002), Vec::Constant(kInputs, 0.1));
  if (root.has("input_bounds")) {
    Node n = root.child("input_bounds");
    for (int i = 0; i < kInputs; ++i) {
      if (!n.has(kInputNames[i])) throw ValidationError(n.path(kInputNames[i]), "missing");
      auto [lo, hi] = n.interval(kInputNames[i]);
      u_box.lower(i) = lo;
      u_box.upper(i) = hi;
    }
    n.finish();
  } else {
    root.text("input_bounds", "");
    sc.defaults_applied.push_back("input_bounds: absent, using mdot_f [0, 0.1] and mdot_r [0.002, 0.1] kg/s");
  }
  if (u_box.lower.minCoeff() < 0.0) throw ValidationError("input_bounds", "flows cannot be negative");
  if (!(u_box.upper.array().isFinite().all())) throw ValidationError("input_bounds", "upper bounds must be finite");
  if (u_box.lower.sum() <= kMinFlow) {
    throw ValidationError("input_bounds", "lower bounds allow a zero mixed flow");
  }
  sc.setup.rmpc.u_box = u_box;

  {
    Node n = root.child("design_bounds");
    Vec lo(DesignVector::kSize), hi(DesignVector::kSize);
    for (int i = 0; i < DesignVector::kSize; ++i) {
      if (n.has(kDesignNames[i])) {
        auto [l, h] = n.interval(kDesignNames[i]);
        if (!std::isfinite(l) || !std::isfinite(h)) {
          throw ValidationError(n.path(kDesignNames[i]), "design bounds must be finite");
        }
        lo(i) = l;
        hi(i) = h;
      } else if (i >= 9) {
        n.text(kDesignNames[i], "");
        lo(i) = u_box.lower(i - 9);
        hi(i) = u_box.upper(i - 9);
        sc.defaults_applied.push_back(std::string("design_bounds.") + kDesignNames[i] +
                                      ": absent, using the input bounds " +
                                      format_interval(lo(i), hi(i)));
      } else {
        throw ValidationError(n.path(kDesignNames[i]), "missing");
      }
    }
    n.finish();
    if (lo(0) <= 0.0 || lo(1) <= 0.0) throw ValidationError("design_bounds.C_c", "capacitances must be positive");
    if (lo(3) <= 0.0) throw ValidationError("design_bounds.R_s", "resistance must be positive");
    if (lo(5) < kMinMass) throw ValidationError("design_bounds.M_r0", "reservoir mass must stay above 1e-3 kg");
    sc.bounds.box = BoxSet(lo, hi);
  }

  if (root.has("initial_design")) {
    Node n = root.child("initial_design");
    Vec v(DesignVector::kSize);
    for (int i = 0; i < DesignVector::kSize; ++i) {
      if (!n.has(kDesignNames[i])) throw ValidationError(n.path(kDesignNames[i]), "missing");
      v(i) = n.number(kDesignNames[i]);
      if (v(i) < sc.bounds.box.lower(i) || v(i) > sc.bounds.box.upper(i)) {
        throw ValidationError(n.path(kDesignNames[i]), "outside design_bounds " +
                                                           format_interval(sc.bounds.box.lower(i),
                                                                           sc.bounds.box.upper(i)));
      }
    }
    n.finish();
    sc.initial = DesignVector::from_vec(v, sc.setup.c_p);
  } else {
    root.text("initial_design", "");
    sc.initial = DesignVector::from_vec(sc.bounds.box.center(), sc.setup.c_p);
    sc.defaults_applied.push_back("initial_design: absent, using the centre of design_bounds");
  }

  {
    Vec lo = Vec::Constant(kStates, -kInf), hi = Vec::Constant(kStates, kInf);
    lo(kIndexTh) = 45.0;
    hi(kIndexTh) = 50.0;
    if (root.has("state_bounds")) {
      Node n = root.child("state_bounds");
      for (int i = 0; i < kStates; ++i) {
        if (n.has(kStateNames[i])) {
          auto [l, h] = n.interval(kStateNames[i]);
          lo(i) = l;
          hi(i) = h;
        } else {
          n.text(kStateNames[i], "");
          sc.defaults_applied.push_back(std::string("state_bounds.") + kStateNames[i] +
                                        ": absent, using " + format_interval(lo(i), hi(i)));
        }
      }
      n.finish();
    } else {
      root.text("state_bounds", "");
      sc.defaults_applied.push_back("state_bounds: absent, using T_h in [45, 50], others unbounded");
    }
    sc.setup.state_box = BoxSet(lo, hi);
  }

  if (root.has("rate_limit")) {
    Node n = root.child("rate_limit");
    Vec r(kInputs);
    for (int i = 0; i < kInputs; ++i) {
      r(i) = n.number(kInputNames[i]);
      if (!(r(i) > 0.0)) throw ValidationError(n.path(kInputNames[i]), "must be positive");
    }
    n.finish();
    sc.setup.rmpc.rate_limit = r;
  } else {
    root.text("rate_limit", "");
    sc.defaults_applied.push_back("rate_limit: absent, input changes are unlimited");
  }

  {
    DistVec half(1.0, 1.0, 0.01);
    BoxSet w(-half, half);
    if (root.has("disturbance_bounds")) {
      Node n = root.child("disturbance_bounds");
      for (int i = 0; i < kDisturbances; ++i) {
        if (!n.has(kDistNames[i])) throw ValidationError(n.path(kDistNames[i]), "missing");
        auto [l, h] = n.interval(kDistNames[i]);
        if (!std::isfinite(l) || !std::isfinite(h)) {
          throw ValidationError(n.path(kDistNames[i]), "disturbance bounds must be finite");
        }
        w.lower(i) = l;
        w.upper(i) = h;
      }
      n.finish();
    } else {
      root.text("disturbance_bounds", "");
      sc.defaults_applied.push_back(
          "disturbance_bounds: absent, using Qdot_h +-1 kW, T_s +-1 K, mdot_e +-0.01 kg/s");
    }
    sc.setup.rmpc.w_box = w;
  }

  if (root.has("lqr")) {
    Node n = root.child("lqr");
    if (n.has("Q")) sc.setup.lqr.Q = n.vector("Q", kReducedStates).asDiagonal();
    else n.text("Q", "");
    if (n.has("R")) sc.setup.lqr.R = n.vector("R", kInputs).asDiagonal();
    else n.text("R", "");
    sc.setup.lqr.riccati.tol = n.number("tol", sc.setup.lqr.riccati.tol);
    sc.setup.lqr.riccati.max_iter = n.integer("max_iter", sc.setup.lqr.riccati.max_iter);
    n.finish();
    if (sc.setup.lqr.Q.diagonal().minCoeff() < 0.0) throw ValidationError("lqr.Q", "must be nonnegative");
    if (!(sc.setup.lqr.R.diagonal().minCoeff() > 0.0)) throw ValidationError("lqr.R", "must be positive");
  } else {
    root.text("lqr", "");
    sc.defaults_applied.push_back("lqr: absent, using Q = diag(1, 10, 10, 10), R = I");
  }

  if (root.has("rmpc")) {
    Node n = root.child("rmpc");
    RmpcConfig& r = sc.setup.rmpc;
    r.N_p = n.integer("N_p", r.N_p);
    if (r.N_p < 1) throw ValidationError("rmpc.N_p", "must be at least 1");
    if (n.has("R_eff")) r.R_eff = n.vector("R_eff", kInputs).asDiagonal();
    else n.text("R_eff", "");
    if (!(r.R_eff.diagonal().minCoeff() > 0.0)) throw ValidationError("rmpc.R_eff", "must be positive");
    r.qp.feas_tol = n.number("feas_tol", r.qp.feas_tol);
    r.qp.max_iter = n.integer("max_iter", r.qp.max_iter);
    n.finish();
  } else {
    root.text("rmpc", "");
    sc.defaults_applied.push_back("rmpc: absent, using N_p = 10, R_eff = I");
  }

  if (root.has("rccd")) {
    Node n = root.child("rccd");
    PatternSearchOptions& o = sc.rccd;
    o.mesh_init = n.number("mesh_init", o.mesh_init);
    o.mesh_min = n.number("mesh_min", o.mesh_min);
    o.mesh_max = n.number("mesh_max", o.mesh_max);
    o.obj_tol = n.number("obj_tol", o.obj_tol);
    o.max_evals = n.integer("max_evals", o.max_evals);
    o.random_directions = n.boolean("random_directions", o.random_directions);
    o.threads = n.integer("threads", o.threads);
    o.poll_batch = n.integer("poll_batch", o.poll_batch);
    n.finish();
    if (!(o.mesh_min > 0.0 && o.mesh_init >= o.mesh_min && o.mesh_max >= o.mesh_init)) {
      throw ValidationError("rccd.mesh_init", "need 0 < mesh_min <= mesh_init <= mesh_max");
    }
  } else {
    root.text("rccd", "");
    sc.defaults_applied.push_back("rccd: absent, using default pattern-search settings");
  }

  if (root.has("olccd")) {
    Node n = root.child("olccd");
    AugLagOptions& o = sc.olccd;
    o.max_outer = n.integer("max_outer", o.max_outer);
    o.max_inner = n.integer("max_inner", o.max_inner);
    o.constraint_tol = n.number("constraint_tol", o.constraint_tol);
    o.backoff = n.number("backoff", o.backoff);
    o.rho_init = n.number("rho_init", o.rho_init);
    o.rho_growth = n.number("rho_growth", o.rho_growth);
    o.rho_max = n.number("rho_max", o.rho_max);
    o.inner_tol_init = n.number("inner_tol_init", o.inner_tol_init);
    o.inner_tol_min = n.number("inner_tol_min", o.inner_tol_min);
    o.fd_step = n.number("fd_step", o.fd_step);
    o.memory = n.integer("memory", o.memory);
    n.finish();
  } else {
    root.text("olccd", "");
    sc.defaults_applied.push_back("olccd: absent, using default augmented-Lagrangian settings");
  }
  root.finish();

  sc.setup.sync_rmpc_boxes();
  apply_seed(sc, sc.seed);
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read scenario " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  Scenario sc = parse_scenario(ss.str(), path.parent_path());
  sc.source = path;
  return sc;
}

void apply_seed(Scenario& sc, std::uint64_t seed) {
  sc.seed = seed;
  sc.rccd.seed = seed;
}

std::string describe(const Scenario& sc) {
  std::ostringstream os;
  os << "scenario " << sc.name << ": n_t = " << sc.steps() << " steps of " << sc.tau_s
     << " s, seed " << sc.seed << "\n";
  if (sc.stand_in_profile) os << "  nominal profile: synthetic stand-in, not measured data\n";
  os << "  design bounds:";
  for (int i = 0; i < DesignVector::kSize; ++i) {
    os << " " << kDesignNames[i] << format_interval(sc.bounds.box.lower(i), sc.bounds.box.upper(i));
  }
  os << "\n  state bounds:";
  for (int i = 0; i < kStates; ++i) {
    os << " " << kStateNames[i]
       << format_interval(sc.setup.state_box.lower(i), sc.setup.state_box.upper(i));
  }
  os << "\n  input bounds:";
  for (int i = 0; i < kInputs; ++i) {
    os << " " << kInputNames[i]
       << format_interval(sc.setup.rmpc.u_box.lower(i), sc.setup.rmpc.u_box.upper(i));
  }
  os << "\n  disturbance bounds:";
  for (int i = 0; i < kDisturbances; ++i) {
    os << " " << kDistNames[i]
       << format_interval(sc.setup.rmpc.w_box.lower(i), sc.setup.rmpc.w_box.upper(i));
  }
  os << "\n  N_p = " << sc.setup.rmpc.N_p << "\n";
  for (const auto& d : sc.defaults_applied) os << "  default: " << d << "\n";
  return os.str();
}

}  // namespace ccd
