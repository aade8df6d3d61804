#include "ccd/app.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>

namespace ccd {

namespace fs = std::filesystem;

Scenario prepare_scenario(const RunOptions& opt) {
  if (opt.scenario.empty()) throw CcdError("--scenario is required");
  Scenario sc = load_scenario(opt.scenario);
  if (opt.seed) apply_seed(sc, *opt.seed);
  return sc;
}

DesignResult solve_rccd(const Scenario& sc) {
  return outer_optimize(sc.initial, sc.bounds, sc.setup, sc.rccd);
}

DesignResult solve_olccd(const Scenario& sc) {
  TranscriptionVector tv;
  tv.p = sc.initial.p;
  tv.x0 = sc.initial.x0;
  tv.U.assign(static_cast<std::size_t>(sc.steps()), sc.initial.u0);
  return transcribe_and_solve(tv, sc.plant_state_bounds(), sc.setup, sc.olccd);
}

RolloutResult replay_design(const StoredDesign& design, const Scenario& sc,
                            const Perturbation& mode) {
  if (design.schedules.size() != sc.steps()) {
    throw DimensionMismatch("design schedule has " + std::to_string(design.schedules.size()) +
                            " steps but scenario " + sc.name + " has " +
                            std::to_string(sc.steps()));
  }
  const DisturbanceProfile actual = perturb_profile(sc.setup.profile, sc.setup.rmpc.w_box, mode);
  if (design.schedules.has_gains()) {
    return closed_loop_replay(design.schedules, design.design.x0, design.design.u0, actual,
                              design.design.p, sc.setup);
  }
  std::vector<ControlInput> U;
  for (const Vec& c : design.schedules.C_star) U.push_back(ControlInput::from(c));
  return open_loop_replay(U, design.design.x0, actual, design.design.p, sc.setup);
}

namespace {

std::string label_of(const std::string& algorithm) {
  return algorithm == "rccd" ? "rCCD" : algorithm == "olccd" ? "OL CCD" : algorithm;
}

std::string file_tag(const Perturbation& mode) {
  std::string tag = mode.name();
  for (char& c : tag) {
    if (c == ':') c = '_';
  }
  return tag;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void log_design(const DesignResult& r, double secs, std::ostream& log) {
  const Vec v = r.design.to_vec();
  log << label_of(r.algorithm) << ": J_sys* = " << format_number(r.J_sys) << " kg after "
      << r.trace.evaluations << " evaluations (" << std::to_string(secs) << " s)\n";
  log << "  p* = [C_c " << v(0) << ", C_h " << v(1) << ", T_f " << v(2) << ", R_s " << v(3)
      << "]\n  x0* = [" << v(4) << ", " << v(5) << ", " << v(6) << ", " << v(7) << ", " << v(8)
      << "], u0* = [" << v(9) << ", " << v(10) << "]\n";
  if (r.rollout.clip_events > 0) {
    log << "  applied input clipped to U at " << r.rollout.clip_events << " steps\n";
  }
}

int run_design(const RunOptions& opt, std::ostream& log, bool robust) {
  const Scenario sc = prepare_scenario(opt);
  log << describe(sc);
  fs::create_directories(opt.out_dir);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const DesignResult r = robust ? solve_rccd(sc) : solve_olccd(sc);
    log_design(r, seconds_since(t0), log);
    write_design_outputs(r, sc, opt.out_dir, log);
    return kExitOk;
  } catch (const NoFeasiblePoint& e) {
    log << (robust ? "rccd" : "olccd") << ": infeasible: " << e.what() << "\n";
    if (e.first_infeasible_k) log << "first_infeasible_k = " << *e.first_infeasible_k << "\n";
    return kExitInfeasible;
  }
}

struct ReplayRun {
  Perturbation mode;
  RolloutResult result;
  ViolationSummary summary;
};

ReplayRun replay_and_write(const StoredDesign& d, const Scenario& sc, const Perturbation& mode,
                           const fs::path& out_dir, std::ostream& log) {
  ReplayRun run{mode, replay_design(d, sc, mode), {}};
  run.summary = summarize_violations(run.result);
  const DisturbanceProfile actual = perturb_profile(sc.setup.profile, sc.setup.rmpc.w_box, mode);
  const std::string stem = d.algorithm + "_replay_" + file_tag(mode);
  const std::string csv = trajectory_to_csv(make_trajectory_table(run.result, actual));
  write_text(out_dir / (stem + ".csv"), csv);

  std::vector<std::pair<std::string, std::string>> curves;
  const fs::path nominal = out_dir / d.trajectory_csv;
  if (!d.trajectory_csv.empty() && fs::exists(nominal)) {
    curves.emplace_back("planned", read_text(nominal));
  }
  curves.emplace_back(mode.name(), csv);
  const BoxSet& X = sc.setup.state_box;
  write_text(out_dir / (stem + "_T_h.svg"),
             plot_heater_overlay(curves, X.lower(kIndexTh), X.upper(kIndexTh)));
  write_text(out_dir / (stem + "_inputs.svg"), plot_inputs(csv));
  write_text(out_dir / (stem + "_disturbances.svg"), plot_disturbances(csv));

  std::ostringstream os;
  os << label_of(d.algorithm) << " replay (" << mode.name() << "): "
     << format_violations(run.summary) << ", clipped steps " << run.result.clip_events;
  if (!run.result.diagnostic.empty()) os << ", stopped: " << run.result.diagnostic;
  os << "\n";
  write_text(out_dir / (stem + ".txt"), os.str());
  log << os.str();
  return run;
}

}  // namespace

StoredDesign write_design_outputs(const DesignResult& result, const Scenario& sc,
                                  const fs::path& out_dir, std::ostream& log) {
  fs::create_directories(out_dir);
  const std::string alg = result.algorithm;
  const std::string csv_name = alg + "_trajectory.csv";
  const std::string csv = trajectory_to_csv(make_trajectory_table(result.rollout, sc.setup.profile));
  write_text(out_dir / csv_name, csv);

  const StoredDesign stored = to_stored(result, sc.name, csv_name);
  write_text(out_dir / (alg + "_design.json"), design_to_json(stored));

  const BoxSet& X = sc.setup.state_box;
  write_text(out_dir / (alg + "_inputs.svg"), plot_inputs(csv));
  write_text(out_dir / (alg + "_T_h.svg"),
             plot_heater_temperature(csv, X.lower(kIndexTh), X.upper(kIndexTh)));
  write_text(out_dir / (alg + "_disturbances.svg"), plot_disturbances(csv));

  std::string table = design_table(sc, {{label_of(alg), &stored}});
  if (sc.stand_in_profile) table += "nominal profile: synthetic stand-in, not measured data\n";
  write_text(out_dir / (alg + "_report.txt"), table);
  log << table;
  log << "wrote " << (out_dir / (alg + "_design.json")).string() << "\n";
  return stored;
}

int run_rccd(const RunOptions& opt, std::ostream& log) { return run_design(opt, log, true); }
int run_olccd(const RunOptions& opt, std::ostream& log) { return run_design(opt, log, false); }

int run_replay(const RunOptions& opt, std::ostream& log) {
  const Scenario sc = prepare_scenario(opt);
  if (opt.design.empty()) throw CcdError("--design is required for replay");
  const StoredDesign d = design_from_json(read_text(opt.design));
  const Perturbation mode = Perturbation::parse(opt.perturb, sc.seed);
  fs::path out = opt.out_dir;
  fs::create_directories(out);
  // Keep the planned trajectory reachable for the overlay plot.
  if (!d.trajectory_csv.empty()) {
    const fs::path planned = opt.design.parent_path() / d.trajectory_csv;
    if (fs::exists(planned) && !fs::exists(out / d.trajectory_csv)) {
      fs::copy_file(planned, out / d.trajectory_csv);
    }
  }
  const ReplayRun run = replay_and_write(d, sc, mode, out, log);
  return run.summary.count > 0 || !run.result.diagnostic.empty() ? kExitViolations : kExitOk;
}

int run_compare(const RunOptions& opt, std::ostream& log) {
  const Scenario sc = prepare_scenario(opt);
  log << describe(sc);
  fs::create_directories(opt.out_dir);

  struct Entry {
    std::string algorithm;
    std::optional<StoredDesign> design;
    std::string failure;
    std::vector<ReplayRun> replays;
  };
  std::vector<Entry> entries{{"rccd", {}, {}, {}}, {"olccd", {}, {}, {}}};
  for (Entry& e : entries) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const DesignResult r = e.algorithm == "rccd" ? solve_rccd(sc) : solve_olccd(sc);
      log_design(r, seconds_since(t0), log);
      e.design = write_design_outputs(r, sc, opt.out_dir, log);
    } catch (const NoFeasiblePoint& ex) {
      e.failure = ex.what();
      log << e.algorithm << ": infeasible: " << ex.what() << "\n";
      if (ex.first_infeasible_k) log << "first_infeasible_k = " << *ex.first_infeasible_k << "\n";
    }
  }
  const std::vector<Perturbation> modes{Perturbation::none(), Perturbation::vertex_hi(),
                                        Perturbation::vertex_lo(),
                                        Perturbation::random(sc.seed)};
  for (Entry& e : entries) {
    if (!e.design) continue;
    for (const auto& m : modes) e.replays.push_back(replay_and_write(*e.design, sc, m, opt.out_dir, log));
  }

  std::ostringstream rep;
  rep << "comparison on scenario " << sc.name << " (" << sc.steps() << " steps)\n\n";
  std::vector<std::pair<std::string, const StoredDesign*>> cols;
  for (const Entry& e : entries) {
    if (e.design) cols.emplace_back(label_of(e.algorithm), &*e.design);
  }
  rep << design_table(sc, cols) << "\n";
  for (const Entry& e : entries) {
    if (!e.design) rep << label_of(e.algorithm) << ": no feasible design (" << e.failure << ")\n";
  }
  if (entries[0].design && entries[1].design) {
    const double jr = entries[0].design->J_sys;
    const double jo = entries[1].design->J_sys;
    char buf[128];
    std::snprintf(buf, sizeof buf, "J_sys*: rCCD %.4f kg, OL CCD %.4f kg, gap %.2f%%\n", jr, jo,
                  100.0 * (jr - jo) / jo);
    rep << buf;
  }
  rep << "\nreplay violation tallies\n";
  for (const Entry& e : entries) {
    for (const ReplayRun& r : e.replays) {
      rep << "  " << label_of(e.algorithm) << " " << r.mode.name() << ": "
          << format_violations(r.summary) << "\n";
    }
  }
  if (sc.stand_in_profile) rep << "\nnominal profile: synthetic stand-in, not measured data\n";
  write_text(opt.out_dir / "compare_report.txt", rep.str());
  log << rep.str();
  return entries[0].design && entries[1].design ? kExitOk : kExitInfeasible;
}

int run_validate(const RunOptions& opt, std::ostream& log) {
  const Scenario sc = prepare_scenario(opt);
  log << describe(sc) << "scenario OK\n";
  return kExitOk;
}

}  // namespace ccd
