#include "ccd/app.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

// Writes everything to stderr and, once the output directory is known, to
// run.log inside it.
class TeeBuf : public std::streambuf {
 public:
  TeeBuf(std::streambuf* a, std::streambuf* b) : a_(a), b_(b) {}

 protected:
  int overflow(int c) override {
    if (c == EOF) return !EOF;
    const int ra = a_->sputc(static_cast<char>(c));
    const int rb = b_ ? b_->sputc(static_cast<char>(c)) : c;
    return ra == EOF || rb == EOF ? EOF : c;
  }
  int sync() override {
    const int ra = a_->pubsync();
    const int rb = b_ ? b_->pubsync() : 0;
    return ra == 0 && rb == 0 ? 0 : -1;
  }

 private:
  std::streambuf* a_;
  std::streambuf* b_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust and open-loop control co-design for the dual-tank thermal plant"};
  app.require_subcommand(1);

  ccd::RunOptions opt;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", opt.scenario, "scenario JSON")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--seed", seed, "override the scenario seed");
  };
  auto* rccd = app.add_subcommand("rccd", "robust co-design (pattern search over rMPC rollouts)");
  auto* olccd = app.add_subcommand("olccd", "open-loop co-design baseline");
  auto* replay = app.add_subcommand("replay", "replay a stored design on a perturbed profile");
  auto* compare = app.add_subcommand("compare", "run both designs and replays, one report");
  auto* validate = app.add_subcommand("validate", "load and check a scenario");
  for (auto* cmd : {rccd, olccd, replay, compare, validate}) add_common(cmd);
  replay->add_option("--design", opt.design, "DesignResult JSON")->required()->check(CLI::ExistingFile);
  replay->add_option("--perturb", opt.perturb, "none | vertex_hi | vertex_lo | random[:seed]")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // usage errors share the generic error code; --help still exits 0
    const int code = app.exit(e);
    return code == 0 ? ccd::kExitOk : ccd::kExitError;
  }
  for (auto* cmd : {rccd, olccd, replay, compare, validate}) {
    if (cmd->count("--seed")) opt.seed = seed;
  }

  std::ofstream file;
  if (!validate->parsed()) {
    std::error_code ec;
    std::filesystem::create_directories(opt.out_dir, ec);
    file.open(opt.out_dir / "run.log", std::ios::app);
  }
  TeeBuf buf(std::cerr.rdbuf(), file.is_open() ? file.rdbuf() : nullptr);
  std::ostream log(&buf);

  try {
    int code = ccd::kExitError;
    if (rccd->parsed()) code = ccd::run_rccd(opt, log);
    else if (olccd->parsed()) code = ccd::run_olccd(opt, log);
    else if (replay->parsed()) code = ccd::run_replay(opt, log);
    else if (compare->parsed()) code = ccd::run_compare(opt, log);
    else if (validate->parsed()) code = ccd::run_validate(opt, log);
    log.flush();
    return code;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    log.flush();
    return ccd::kExitError;
  }
}
