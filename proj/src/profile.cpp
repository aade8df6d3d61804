#include "ccd/profile.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace ccd {

DisturbanceProfile::DisturbanceProfile(std::vector<Disturbance> samples,
                                       double sample_period)
    : samples_(std::move(samples)), sample_period_(sample_period) {
  if (!(sample_period_ > 0.0)) {
    throw CcdError("DisturbanceProfile: sample period must be positive");
  }
}

const Disturbance& DisturbanceProfile::at(int k) const {
  if (k < 1 || k > size()) {
    throw std::out_of_range("DisturbanceProfile: step " + std::to_string(k) +
                            " outside [1, " + std::to_string(size()) + "]");
  }
  return samples_[static_cast<std::size_t>(k - 1)];
}

const Disturbance& DisturbanceProfile::at_or_last(int k) const {
  if (samples_.empty()) throw std::out_of_range("DisturbanceProfile: empty");
  return at(std::min(k, size()));
}

Perturbation Perturbation::parse(const std::string& text,
                                 std::uint64_t default_seed) {
  if (text == "none") return none();
  if (text == "vertex_hi") return vertex_hi();
  if (text == "vertex_lo") return vertex_lo();
  if (text == "random") return random(default_seed);
  if (text.rfind("random:", 0) == 0) {
    const std::string tail = text.substr(7);
    std::uint64_t seed = 0;
    auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), seed);
    if (ec != std::errc() || ptr != tail.data() + tail.size()) {
      throw CcdError("bad perturbation seed '" + tail + "'");
    }
    return random(seed);
  }
  throw CcdError("unknown perturbation mode '" + text +
                 "' (expected none, vertex_hi, vertex_lo, random[:seed])");
}

std::string Perturbation::name() const {
  switch (kind) {
    case Kind::None: return "none";
    case Kind::VertexHi: return "vertex_hi";
    case Kind::VertexLo: return "vertex_lo";
    case Kind::Random: return "random:" + std::to_string(seed);
  }
  return "none";
}

DisturbanceProfile perturb_profile(const DisturbanceProfile& nominal,
                                   const BoxSet& w_box, const Perturbation& mode) {
  if (w_box.dim() != kDisturbances) {
    throw DimensionMismatch("perturb_profile: disturbance box must be 3-dimensional");
  }
  std::mt19937_64 rng(mode.seed);
  // 53 random mantissa bits; independent of the standard library's
  // distribution implementations.
  auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  std::vector<Disturbance> out;
  out.reserve(nominal.samples().size());
  for (const auto& d : nominal.samples()) {
    DistVec w = DistVec::Zero();
    switch (mode.kind) {
      case Perturbation::Kind::None:
        break;
      case Perturbation::Kind::VertexHi:
        w = w_box.upper;
        break;
      case Perturbation::Kind::VertexLo:
        w = w_box.lower;
        break;
      case Perturbation::Kind::Random:
        for (int i = 0; i < kDisturbances; ++i) {
          w(i) = w_box.lower(i) + unit() * (w_box.upper(i) - w_box.lower(i));
        }
        break;
    }
    out.push_back(Disturbance::from(d.vec() + w));
  }
  return {std::move(out), nominal.sample_period()};
}

namespace {

double pulse_value(double t, double base, const std::vector<Pulse>& pulses) {
  double v = base;
  for (const auto& p : pulses) {
    if (t >= p.start && t < p.end) v = p.value;
  }
  return v;
}

}  // namespace

DisturbanceProfile make_pulsed_profile(const PulsedProfileSpec& spec, double t_f,
                                       double tau_s) {
  const double steps = t_f / tau_s;
  const long n = std::lround(steps);
  if (n < 1 || std::abs(steps - static_cast<double>(n)) > 1e-9) {
    throw CcdError("pulsed profile: t_f / tau_s must be a positive integer");
  }
  std::vector<Disturbance> samples;
  samples.reserve(static_cast<std::size_t>(n));
  for (long k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * tau_s;
    samples.push_back({pulse_value(t, spec.Qdot_base, spec.Qdot_pulses), spec.T_s,
                       pulse_value(t, spec.mdot_e_base, spec.mdot_e_pulses)});
  }
  return {std::move(samples), tau_s};
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw CcdError("format_number: conversion failed");
  return std::string(buf, ptr);
}

std::string profile_to_csv(const DisturbanceProfile& profile) {
  std::ostringstream os;
  os << kProfileCsvHeader << '\n';
  int k = 1;
  for (const auto& d : profile.samples()) {
    os << k++ << ',' << format_number(d.Qdot_h) << ',' << format_number(d.T_s)
       << ',' << format_number(d.mdot_e) << '\n';
  }
  return os.str();
}

namespace {

double parse_double(const std::string& field, int line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw CcdError("profile CSV line " + std::to_string(line) + ": bad number '" +
                   field + "'");
  }
  return v;
}

}  // namespace

DisturbanceProfile profile_from_csv(const std::string& text, double sample_period) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != kProfileCsvHeader) {
    throw CcdError(std::string("profile CSV: expected header '") +
                   kProfileCsvHeader + "'");
  }
  std::vector<Disturbance> samples;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    if (fields.size() != 4) {
      throw CcdError("profile CSV line " + std::to_string(lineno) +
                     ": expected 4 fields");
    }
    const double k = parse_double(fields[0], lineno);
    if (k != static_cast<double>(samples.size() + 1)) {
      throw CcdError("profile CSV line " + std::to_string(lineno) +
                     ": step index out of sequence");
    }
    samples.push_back({parse_double(fields[1], lineno), parse_double(fields[2], lineno),
                       parse_double(fields[3], lineno)});
  }
  return {std::move(samples), sample_period};
}

DisturbanceProfile load_profile_csv(const std::filesystem::path& path,
                                    double sample_period) {
  std::ifstream in(path);
  if (!in) throw CcdError("cannot open profile CSV " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return profile_from_csv(ss.str(), sample_period);
}

void save_profile_csv(const DisturbanceProfile& profile,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw CcdError("cannot write " + path.string());
  out << profile_to_csv(profile);
}

}  // namespace ccd
