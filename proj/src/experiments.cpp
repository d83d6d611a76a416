// Copyright 2026 The nvsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nvsim/experiments.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "nvsim/bath.hpp"
#include "nvsim/dynamics.hpp"
#include "nvsim/gates.hpp"
#include "nvsim/noise.hpp"
#include "nvsim/nv_hamiltonian.hpp"
#include "nvsim/parallel.hpp"

#ifndef NVSIM_VERSION
#define NVSIM_VERSION "0.0.0"
#endif

namespace nvsim {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr double kKhz = kTwoPi * 1e3;
constexpr double kMhz = kTwoPi * 1e6;

enum class Kind { Number, Integer, String, NumberList, IntegerList };

struct Field {
  std::string name;
  Kind kind;
  bool required;
  json fallback;  // used when optional and absent; null means "absent"
};

struct TagSpec {
  std::string tag;
  std::string description;
  std::vector<Field> fields;
};

Field req(const char* name, Kind k) { return Field{name, k, true, nullptr}; }
Field opt(const char* name, Kind k, json def) { return Field{name, k, false, std::move(def)}; }

std::vector<Field> noise_fields() {
  return {opt("b_khz", Kind::Number, nullptr), opt("tau_us", Kind::Number, nullptr),
          opt("n_trajectories", Kind::Integer, kDefaultTrajectories), opt("dt_ns", Kind::Number, 0.0)};
}

std::vector<Field> join(std::vector<Field> a, const std::vector<Field>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

const std::vector<TagSpec>& specs() {
  static const std::vector<TagSpec> s = {
      {"t2-scan", "effective T2 versus continuous drive strength: formula curve and simulated 1/e points",
       {req("b_khz", Kind::Number), req("tau_us", Kind::Number), req("omega_mhz", Kind::NumberList),
        opt("n_trajectories", Kind::Integer, kDefaultTrajectories), opt("n_points", Kind::Integer, 61),
        opt("t_max_factor", Kind::Number, 2.0), opt("curve_points", Kind::Integer, 121),
        opt("dt_ns", Kind::Number, 0.0)}},
      {"fid", "free induction decay of one qubit: analytic envelope and trajectory average",
       {req("b_khz", Kind::Number), req("tau_us", Kind::Number),
        opt("n_trajectories", Kind::Integer, 1000), opt("t_max_us", Kind::Number, 40.0),
        opt("n_points", Kind::Integer, 81), opt("dt_ns", Kind::Number, 0.0)}},
      {"spectrum-bath", "surface spin bath noise spectrum and Lorentzian fit over random placements",
       {req("species", Kind::String), req("radius_nm", Kind::Number),
        opt("spacing_nm", Kind::Number, 0.25), opt("n_spins", Kind::Integer, 0),
        opt("placements", Kind::Integer, 8), opt("grid_points", Kind::Integer, 120)}},
      {"xi-scan", "dipolar zz factor xi over random NV axis pairs versus field",
       {req("b_tesla", Kind::NumberList), req("n_samples", Kind::Integer),
        opt("bond_nm", Kind::Number, 10.0)}},
      {"gap-scan", "dressed two-level gap over random NV axes versus field",
       {req("b_tesla", Kind::NumberList), req("n_samples", Kind::Integer),
        opt("bond_nm", Kind::Number, 10.0)}},
      {"gate2", "two-qubit manifold gate fidelity versus drive strength, with population traces",
       join({req("omega_mhz", Kind::NumberList), req("theta_pi", Kind::NumberList),
             opt("j_khz", Kind::Number, 26.0), opt("manifold", Kind::String, "M1"),
             opt("frame", Kind::String, "time-adjust"), opt("population_points", Kind::Integer, 0)},
            noise_fields())},
      {"cluster", "cluster state preparation fidelity versus drive strength",
       join({req("omega_mhz", Kind::NumberList), opt("lattice", Kind::String, "chain"),
             opt("n_qubits", Kind::Integer, 4), opt("j_khz", Kind::Number, 26.0),
             opt("cycles", Kind::Integer, 2), opt("cutoff_order", Kind::Integer, 1),
             opt("frame", Kind::String, "time-adjust")},
            noise_fields())},
      {"heisenberg", "XXZ chain step from zz and flip-flop blocks versus cycle count",
       join({req("n_qubits", Kind::Integer), req("delta", Kind::Number), req("theta_pi", Kind::Number),
             req("omega_mhz", Kind::Number), req("cycles", Kind::IntegerList),
             opt("j_khz", Kind::Number, 26.0), opt("cutoff_order", Kind::Integer, 1),
             opt("frame", Kind::String, "time-adjust")},
            noise_fields())},
      {"compensate", "systematic coupling error compensation versus eps",
       join({req("mode", Kind::String), req("eps", Kind::NumberList), req("omega_mhz", Kind::Number),
             opt("theta_pi", Kind::Number, 0.5), opt("j_khz", Kind::Number, 26.0),
             opt("frame", Kind::String, "echo"), opt("model", Kind::String, "full"),
             opt("eps_pattern", Kind::NumberList, json::array({1.0, -1.0, 0.75})),
             opt("realization", Kind::String, "exact"), opt("cycles", Kind::Integer, 2)},
            noise_fields())},
      {"global-fail", "global M1/M3 addition against the interaction-frame zz route",
       {req("omega_mhz", Kind::Number), req("cycles", Kind::IntegerList),
        opt("n_qubits", Kind::Integer, 3), opt("j_khz", Kind::Number, 26.0),
        opt("theta_pi", Kind::Number, 0.5), opt("filter_omega_osc_mhz", Kind::Number, 1.0),
        opt("filter_t_us", Kind::Number, 10.0), opt("filter_points", Kind::Integer, 200)}},
  };
  return s;
}

const TagSpec* find_spec(const std::string& tag) {
  for (const auto& s : specs()) {
    if (s.tag == tag) return &s;
  }
  return nullptr;
}

std::string join_names(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? ", " : "") + v[k];
  return out;
}

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Number: return "a number";
    case Kind::Integer: return "an integer";
    case Kind::String: return "a string";
    case Kind::NumberList: return "a non-empty list of numbers";
    case Kind::IntegerList: return "a non-empty list of integers";
  }
  return "";
}

bool kind_ok(const json& v, Kind k) {
  switch (k) {
    case Kind::Number: return v.is_number();
    case Kind::Integer: return v.is_number_integer();
    case Kind::String: return v.is_string();
    case Kind::NumberList:
    case Kind::IntegerList:
      if (!v.is_array() || v.empty()) return false;
      for (const auto& e : v) {
        if (k == Kind::NumberList ? !e.is_number() : !e.is_number_integer()) return false;
      }
      return true;
  }
  return false;
}

// Read-only view of a validated params block.
class Params {
 public:
  Params(const std::string& tag, const ordered_json& p) : tag_(tag), p_(p) {}
  bool has(const std::string& k) const { return p_.contains(k) && !p_.at(k).is_null(); }
  double num(const std::string& k) const { return p_.at(k).get<double>(); }
  long long integer(const std::string& k) const { return p_.at(k).get<long long>(); }
  std::string str(const std::string& k) const { return p_.at(k).get<std::string>(); }
  std::vector<double> nums(const std::string& k) const { return p_.at(k).get<std::vector<double>>(); }
  std::vector<long long> ints(const std::string& k) const {
    return p_.at(k).get<std::vector<long long>>();
  }
  const std::string& tag() const { return tag_; }

 private:
  std::string tag_;
  const ordered_json& p_;
};

// Collects range problems so that validation reports all of them at once.
class Checker {
 public:
  Checker(const Params& p, std::vector<std::string>& out) : p_(p), out_(out) {}
  void fail(const std::string& key, const std::string& what) {
    out_.push_back("params." + key + " (" + p_.tag() + "): " + what);
  }
  void positive(const std::string& k) {
    if (p_.has(k) && !(p_.num(k) > 0.0)) fail(k, "must be positive");
  }
  void non_negative(const std::string& k) {
    if (p_.has(k) && !(p_.num(k) >= 0.0)) fail(k, "must be non-negative");
  }
  void at_least(const std::string& k, long long lo) {
    if (p_.has(k) && p_.integer(k) < lo) fail(k, "must be at least " + std::to_string(lo));
  }
  void in_range(const std::string& k, long long lo, long long hi) {
    if (p_.has(k) && (p_.integer(k) < lo || p_.integer(k) > hi)) {
      fail(k, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
  }
  void all_non_negative(const std::string& k) {
    if (!p_.has(k)) return;
    for (double v : p_.nums(k)) {
      if (!(v >= 0.0)) return fail(k, "entries must be non-negative");
    }
  }
  void all_at_least(const std::string& k, long long lo) {
    if (!p_.has(k)) return;
    for (long long v : p_.ints(k)) {
      if (v < lo) return fail(k, "entries must be at least " + std::to_string(lo));
    }
  }
  template <class Parse>
  void parses(const std::string& k, Parse parse) {
    if (!p_.has(k)) return;
    try {
      parse(p_.str(k));
    } catch (const InvalidArgument& e) {
      fail(k, e.what());
    }
  }
  void one_of(const std::string& k, const std::vector<std::string>& allowed) {
    if (p_.has(k) && std::find(allowed.begin(), allowed.end(), p_.str(k)) == allowed.end()) {
      fail(k, "must be one of " + join_names(allowed));
    }
  }
  void noise_pair() {
    if (p_.has("b_khz") != p_.has("tau_us")) {
      fail(p_.has("b_khz") ? "tau_us" : "b_khz", "noise needs both b_khz and tau_us");
    }
    positive("b_khz");
    positive("tau_us");
    if (p_.has("n_trajectories")) at_least("n_trajectories", 1);
    non_negative("dt_ns");
  }

 private:
  const Params& p_;
  std::vector<std::string>& out_;
};

void static_checks(const Params& p, std::vector<std::string>& out) {
  Checker c(p, out);
  const std::string& tag = p.tag();
  if (tag == "fid" || tag == "t2-scan") {
    c.positive("b_khz");
    c.positive("tau_us");
    c.at_least("n_trajectories", 1);
    c.at_least("n_points", 2);
    c.non_negative("dt_ns");
    c.positive("t_max_us");
    c.positive("t_max_factor");
    c.at_least("curve_points", 2);
    c.all_non_negative("omega_mhz");
  } else if (tag == "spectrum-bath") {
    c.parses("species", [](const std::string& s) { parse_species(s); });
    c.positive("radius_nm");
    c.positive("spacing_nm");
    c.at_least("n_spins", 0);
    c.at_least("placements", 1);
    c.at_least("grid_points", 8);
  } else if (tag == "xi-scan" || tag == "gap-scan") {
    c.all_non_negative("b_tesla");
    c.at_least("n_samples", 1);
    c.positive("bond_nm");
  } else if (tag == "gate2") {
    c.all_non_negative("omega_mhz");
    c.positive("j_khz");
    c.parses("manifold", [](const std::string& s) { parse_manifold(s); });
    c.parses("frame", [](const std::string& s) { parse_frame_method(s); });
    c.at_least("population_points", 0);
    c.noise_pair();
  } else if (tag == "cluster") {
    c.all_non_negative("omega_mhz");
    c.one_of("lattice", {"chain", "square"});
    c.in_range("n_qubits", 2, 8);
    c.positive("j_khz");
    c.at_least("cycles", 1);
    c.at_least("cutoff_order", 1);
    c.parses("frame", [](const std::string& s) { parse_frame_method(s); });
    c.noise_pair();
  } else if (tag == "heisenberg") {
    c.in_range("n_qubits", 2, 6);
    c.non_negative("delta");
    c.non_negative("omega_mhz");
    c.all_at_least("cycles", 1);
    c.positive("j_khz");
    c.at_least("cutoff_order", 1);
    c.parses("frame", [](const std::string& s) { parse_frame_method(s); });
    c.noise_pair();
  } else if (tag == "compensate") {
    c.one_of("mode", {"two-qubit", "multiqubit"});
    c.non_negative("omega_mhz");
    c.positive("j_khz");
    c.parses("frame", [](const std::string& s) { parse_frame_method(s); });
    c.one_of("model", {"full", "secular"});
    c.one_of("realization", {"exact", "synthesized"});
    c.at_least("cycles", 1);
    if (p.has("eps_pattern") && p.nums("eps_pattern").size() > 7) {
      c.fail("eps_pattern", "at most 7 entries (8 qubits)");
    }
    c.noise_pair();
  } else if (tag == "global-fail") {
    c.non_negative("omega_mhz");
    c.all_at_least("cycles", 1);
    c.in_range("n_qubits", 2, 8);
    c.positive("j_khz");
    c.positive("filter_omega_osc_mhz");
    c.positive("filter_t_us");
    c.at_least("filter_points", 2);
  }
}

// ---------------------------------------------------------------------------
// Output handling

std::string fmt_num(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

class Csv {
 public:
  Csv() = default;
  Csv(const fs::path& path, const std::string& header) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out_ << header << '\n';
  }
  template <class... Ts>
  void row(const Ts&... vs) {
    if (!out_.is_open()) return;
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(vs), first = false), ...);
    out_ << '\n';
  }

 private:
  static std::string cell(double v) { return fmt_num(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(long long v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }
  std::ofstream out_;
};

struct Ctx {
  bool dry = false;
  std::uint64_t seed = 0;
  fs::path dir;
  std::vector<std::string> files;
  ordered_json summary = ordered_json::object();

  Csv csv(const std::string& name, const std::string& header) {
    if (dry) return Csv();
    files.push_back(name);
    return Csv(dir / name, header);
  }
};

std::optional<NoiseParams> noise_of(const Params& p) {
  if (!p.has("b_khz")) return std::nullopt;
  NoiseParams np{p.num("b_khz") * kKhz, p.num("tau_us") * 1e-6};
  np.validate();
  return np;
}

TrajectoryConfig traj_config(const Params& p, std::uint64_t seed) {
  TrajectoryConfig cfg;
  cfg.dt = p.has("dt_ns") ? p.num("dt_ns") * 1e-9 : 0.0;
  if (p.has("n_trajectories")) cfg.n_trajectories = static_cast<int>(p.integer("n_trajectories"));
  cfg.base_seed = seed;
  return cfg;
}

void check_dt(const TrajectoryConfig& cfg, const PulseSchedule& s, const CouplingGraph& g,
              const NoiseSet& noise) {
  if (cfg.dt > 0.0) validate_dt(cfg.dt, s, g, noise);
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int k = 0; k < n; ++k) v[k] = lo + (hi - lo) * k / (n - 1);
  return v;
}

ordered_json decay_or_null(const std::vector<double>& t, const std::vector<double>& env,
                           DecayMethod m, double* out = nullptr) {
  try {
    const double v = extract_decay_time(t, env, m);
    if (out) *out = v;
    return v;
  } catch (const NumericalError&) {
    if (out) *out = std::nan("");
    return nullptr;
  }
}

// ---------------------------------------------------------------------------
// Experiments

void run_fid(const Params& p, Ctx& ctx) {
  const NoiseParams np{p.num("b_khz") * kKhz, p.num("tau_us") * 1e-6};
  np.validate();
  const double t_max = p.num("t_max_us") * 1e-6;
  const auto times = linspace(0.0, t_max, static_cast<int>(p.integer("n_points")));
  PulseSchedule s(1);
  s.add_segment(t_max, {0.0});
  const CouplingGraph g = uncoupled_graph(1);
  const NoiseSet noise{np};
  const TrajectoryConfig cfg = traj_config(p, ctx.seed);
  check_dt(cfg, s, g, noise);
  if (ctx.dry) return;

  auto analytic = ctx.csv("fid_analytic.csv", "t_s,observable,stderr");
  for (double t : times) analytic.row(t, std::exp(-fid_decay_exponent(np, t)), 0.0);
  const auto ens = ensemble_density(s, g, noise, x_eigenstate(1), cfg, times, {pauli('x')}, false);
  auto sim = ctx.csv("fid_simulated.csv", "t_s,observable,stderr");
  for (std::size_t k = 0; k < times.size(); ++k) sim.row(times[k], ens.mean[0][k], ens.stderr_[0][k]);

  ctx.summary["t_one_over_e_analytic_s"] = fid_one_over_e_time(np);
  ctx.summary["t_one_over_e_simulated_s"] = decay_or_null(times, ens.mean[0], DecayMethod::OneOverE);
  ctx.summary["t_fit_simulated_s"] = decay_or_null(times, ens.mean[0], DecayMethod::ExponentialFit);
  ctx.summary["n_trajectories"] = ens.n_trajectories;
}

void run_t2_scan(const Params& p, Ctx& ctx) {
  const NoiseParams np{p.num("b_khz") * kKhz, p.num("tau_us") * 1e-6};
  np.validate();
  const auto omegas = p.nums("omega_mhz");
  const CouplingGraph g = uncoupled_graph(1);
  const NoiseSet noise{np};
  const int n_points = static_cast<int>(p.integer("n_points"));
  const double factor = p.num("t_max_factor");

  std::vector<PulseSchedule> schedules;
  for (std::size_t k = 0; k < omegas.size(); ++k) {
    const double w = omegas[k] * kMhz;
    PulseSchedule s(1);
    s.add_segment(factor * effective_t2(np, w), {w});
    check_dt(traj_config(p, ctx.seed), s, g, noise);
    schedules.push_back(std::move(s));
  }
  if (ctx.dry) return;

  const double w_top = *std::max_element(omegas.begin(), omegas.end()) * kMhz;
  auto curve = ctx.csv("t2_curve.csv", "omega_rad_s,t2_formula_s");
  for (double w : linspace(0.0, w_top, static_cast<int>(p.integer("curve_points")))) {
    curve.row(w, effective_t2(np, w));
  }

  auto env = ctx.csv("t2_envelopes.csv", "omega_rad_s,t_s,observable,stderr");
  auto pts = ctx.csv("t2_points.csv", "omega_rad_s,t2_formula_s,t2_one_over_e_s,t2_fit_s,t2_rate_s");
  ordered_json rows = ordered_json::array();
  for (std::size_t k = 0; k < omegas.size(); ++k) {
    const double w = omegas[k] * kMhz;
    const double t2f = effective_t2(np, w);
    const auto times = linspace(0.0, schedules[k].total_time(), n_points);
    TrajectoryConfig cfg = traj_config(p, derive_seed(ctx.seed, k));
    const auto ens = ensemble_density(schedules[k], g, noise, x_eigenstate(1), cfg, times, {pauli('x')}, false);
    for (std::size_t i = 0; i < times.size(); ++i) env.row(w, times[i], ens.mean[0][i], ens.stderr_[0][i]);
    double t_e = 0.0, t_fit = 0.0;
    const auto je = decay_or_null(times, ens.mean[0], DecayMethod::OneOverE, &t_e);
    const auto jf = decay_or_null(times, ens.mean[0], DecayMethod::ExponentialFit, &t_fit);
    // Rate route: R_x(t) has converged once t spans many correlation times,
    // so the integral is cut at 100 tau for the slow-decay points.
    const double t_rate = std::min(t2f, 100.0 * np.tau);
    const double rx = decay_rates(DriveProfile::constant(w, t_rate), np, t_rate).rx;
    pts.row(w, t2f, t_e, t_fit, 1.0 / rx);
    rows.push_back({{"omega_rad_s", w}, {"t2_formula_s", t2f}, {"t2_one_over_e_s", je},
                    {"t2_fit_s", jf}, {"t2_rate_s", 1.0 / rx}});
  }
  ctx.summary["points"] = rows;
}

void run_spectrum_bath(const Params& p, Ctx& ctx) {
  BathGeometry geo;
  geo.radius_nm = p.num("radius_nm");
  geo.spacing_nm = p.num("spacing_nm");
  geo.n_spins = static_cast<int>(p.integer("n_spins"));
  geo.validate();
  const BathSpecies species = parse_species(p.str("species"));
  if (ctx.dry) return;
  const BathSummary sum = bath_noise_parameters(geo, species, static_cast<int>(p.integer("placements")),
                                                ctx.seed, static_cast<int>(p.integer("grid_points")));
  auto spec = ctx.csv("bath_spectrum.csv", "omega_rad_s,S");
  for (std::size_t k = 0; k < sum.omega.size(); ++k) spec.row(sum.omega[k], sum.mean_spectrum[k]);
  auto fits = ctx.csv("bath_fits.csv", "placement,tau_s,b_rad_s,t2_s,rms_log_residual");
  for (std::size_t k = 0; k < sum.fits.size(); ++k) {
    const auto& f = sum.fits[k];
    fits.row(k, f.params.tau, f.params.b_rms, f.t2(), f.rms_log_residual);
  }
  const NoiseParams mean{sum.b_mean, sum.tau_mean};
  ctx.summary["n_spins"] = geo.resolved_count();
  ctx.summary["tau_mean_s"] = sum.tau_mean;
  ctx.summary["tau_std_s"] = sum.tau_std;
  ctx.summary["b_mean_rad_s"] = sum.b_mean;
  ctx.summary["b_mean_khz"] = sum.b_mean / kKhz;
  ctx.summary["b_std_rad_s"] = sum.b_std;
  ctx.summary["t2_mean_s"] = sum.t2_mean;
  ctx.summary["fid_one_over_e_s"] = fid_one_over_e_time(mean);
}

void run_orientation(const Params& p, Ctx& ctx, bool gap) {
  const auto fields = p.nums("b_tesla");
  if (ctx.dry) return;
  const auto stats = orientation_statistics(fields, static_cast<std::size_t>(p.integer("n_samples")),
                                            ctx.seed, p.num("bond_nm"));
  ordered_json rows = ordered_json::array();
  if (gap) {
    auto csv = ctx.csv("gap_scan.csv", "B_tesla,gap_mean,gap_var,gap_min,gap_max");
    for (const auto& s : stats) {
      csv.row(s.b_tesla, s.gap_mean, s.gap_var, s.gap_min, s.gap_max);
      rows.push_back({{"b_tesla", s.b_tesla}, {"gap_mean_rad_s", s.gap_mean}, {"ambiguous", s.ambiguous}});
    }
  } else {
    auto csv = ctx.csv("xi_scan.csv", "B_tesla,xi_mean,xi_var,xi_min,xi_max");
    for (const auto& s : stats) {
      csv.row(s.b_tesla, s.xi_mean, s.xi_var, s.xi_min, s.xi_max);
      rows.push_back({{"b_tesla", s.b_tesla}, {"xi_mean", s.xi_mean}, {"xi_var", s.xi_var}});
    }
  }
  ctx.summary["fields"] = rows;
}

Mat projector(const Vec& v) { return v * v.adjoint(); }

void run_gate2(const Params& p, Ctx& ctx) {
  const double j = p.num("j_khz") * kKhz;
  const CouplingGraph g = chain_graph(2, j, 1);
  const ManifoldKind kind = parse_manifold(p.str("manifold"));
  const FrameMethod frame = parse_frame_method(p.str("frame"));
  const auto noise_p = noise_of(p);
  const NoiseSet noise = noise_p ? NoiseSet(2, noise_p) : NoiseSet{};
  const auto omegas = p.nums("omega_mhz");
  const auto thetas = p.nums("theta_pi");
  for (double w : omegas) {
    for (double th : thetas) {
      const auto gate = manifold_gate(th * kPi, kind, g, w * kMhz, frame);
      check_dt(traj_config(p, ctx.seed), gate.schedule, g, noise);
    }
  }
  if (ctx.dry) return;

  auto csv = ctx.csv("gate2.csv", "omega_rad_s,theta_rad,fidelity,total_time_s");
  ordered_json rows = ordered_json::array();
  std::uint64_t idx = 0;
  for (double w : omegas) {
    for (double th : thetas) {
      const auto r = two_qubit_gate_pipeline(th * kPi, kind, g, w * kMhz, noise,
                                             traj_config(p, derive_seed(ctx.seed, idx++)), frame);
      const double total = r.gate.schedule.total_time();
      csv.row(w * kMhz, th * kPi, r.fidelity, total);
      rows.push_back({{"omega_rad_s", w * kMhz}, {"theta_rad", th * kPi}, {"fidelity", r.fidelity},
                      {"total_time_s", total}});
    }
  }
  ctx.summary["gates"] = rows;

  const int n_pop = static_cast<int>(p.integer("population_points"));
  if (n_pop < 2) return;
  // Populations of the two manifold states for the largest rotation.
  const double th = *std::max_element(thetas.begin(), thetas.end()) * kPi;
  const int s2 = kind == ManifoldKind::M1 ? -1 : 1;
  const Vec a0 = x_eigenstate(1), a1 = x_eigenstate(s2);
  const Vec b0 = x_eigenstate(-1), b1 = x_eigenstate(-s2);
  const Vec start_parts[2] = {a0, a1};
  const Vec other_parts[2] = {b0, b1};
  const Vec psi0 = product_state(start_parts);
  const Vec partner = product_state(other_parts);
  const std::string name0 = s2 < 0 ? "+-" : "++";
  const std::string name1 = s2 < 0 ? "-+" : "--";
  auto pop = ctx.csv("gate2_population.csv", "omega_rad_s,t_s,state,population,stderr");
  for (double w : omegas) {
    const auto gate = manifold_gate(th, kind, g, w * kMhz, frame);
    const auto times = linspace(0.0, gate.schedule.total_time(), n_pop);
    const auto ens = ensemble_density(gate.schedule, g, noise, psi0, traj_config(p, derive_seed(ctx.seed, idx++)),
                                      times, {projector(psi0), projector(partner)}, false);
    for (std::size_t k = 0; k < times.size(); ++k) {
      pop.row(w * kMhz, times[k], name0, ens.mean[0][k], ens.stderr_[0][k]);
      pop.row(w * kMhz, times[k], name1, ens.mean[1][k], ens.stderr_[1][k]);
    }
  }
}

CouplingGraph lattice_graph(const Params& p) {
  const double j = p.num("j_khz") * kKhz;
  const int cutoff = static_cast<int>(p.integer("cutoff_order"));
  if (p.str("lattice") == "square") return square_graph(j, cutoff);
  return chain_graph(static_cast<int>(p.integer("n_qubits")), j, cutoff);
}

void run_cluster(const Params& p, Ctx& ctx) {
  const CouplingGraph g = lattice_graph(p);
  const int cycles = static_cast<int>(p.integer("cycles"));
  SynthesisOptions opts;
  opts.frame = parse_frame_method(p.str("frame"));
  const auto noise_p = noise_of(p);
  const NoiseSet noise = noise_p ? NoiseSet(g.n_qubits, noise_p) : NoiseSet{};
  const auto omegas = p.nums("omega_mhz");
  for (double w : omegas) {
    const auto gate = cluster_state_schedule(g, w * kMhz, cycles, opts);
    check_dt(traj_config(p, ctx.seed), gate.schedule, g, noise);
  }
  if (ctx.dry) return;

  const auto stabs = cluster_stabilizers(g);
  auto csv = ctx.csv("cluster.csv", "omega_rad_s,fidelity,stabilizer_mean,stabilizer_min,total_time_s");
  ordered_json rows = ordered_json::array();
  for (std::size_t k = 0; k < omegas.size(); ++k) {
    const double w = omegas[k] * kMhz;
    const auto r = cluster_state_pipeline(g, w, cycles, noise, traj_config(p, derive_seed(ctx.seed, k)), opts);
    double mean = 0.0, lo = 1.0;
    for (const auto& s : stabs) {
      const double v = (s * r.rho).trace().real();
      mean += v / static_cast<double>(stabs.size());
      lo = std::min(lo, v);
    }
    const double total = r.gate.schedule.total_time();
    csv.row(w, r.fidelity, mean, lo, total);
    rows.push_back({{"omega_rad_s", w}, {"fidelity", r.fidelity}, {"stabilizer_min", lo},
                    {"total_time_s", total}});
  }
  ctx.summary["n_qubits"] = g.n_qubits;
  ctx.summary["points"] = rows;
}

void run_heisenberg(const Params& p, Ctx& ctx) {
  const int n = static_cast<int>(p.integer("n_qubits"));
  const double delta = p.num("delta");
  const double theta = p.num("theta_pi") * kPi;
  const double w = p.num("omega_mhz") * kMhz;
  const double j = p.num("j_khz") * kKhz;
  const int cutoff = static_cast<int>(p.integer("cutoff_order"));
  SynthesisOptions opts;
  opts.frame = parse_frame_method(p.str("frame"));
  const auto noise_p = noise_of(p);
  const NoiseSet noise = noise_p ? NoiseSet(n, noise_p) : NoiseSet{};
  const auto cycles = p.ints("cycles");
  const CouplingGraph g = chain_graph(n, j, cutoff);
  for (long long c : cycles) {
    const auto gate = heisenberg_schedule(g, delta, theta, w, static_cast<int>(c), opts);
    check_dt(traj_config(p, ctx.seed), gate.schedule, g, noise);
  }
  if (ctx.dry) return;

  auto csv = ctx.csv("heisenberg.csv", "cycles,hs_distance,fidelity,total_time_s");
  ordered_json rows = ordered_json::array();
  for (std::size_t k = 0; k < cycles.size(); ++k) {
    const auto r = heisenberg_pipeline(n, delta, theta, w, static_cast<int>(cycles[k]), noise,
                                       traj_config(p, derive_seed(ctx.seed, k)), cutoff, j, opts);
    const double total = r.gate.schedule.total_time();
    csv.row(cycles[k], r.hs_distance, r.fidelity, total);
    rows.push_back({{"cycles", cycles[k]}, {"hs_distance", r.hs_distance}, {"fidelity", r.fidelity},
                    {"total_time_s", total}});
  }
  ctx.summary["points"] = rows;
}

void run_compensate(const Params& p, Ctx& ctx) {
  const bool two = p.str("mode") == "two-qubit";
  const double j = p.num("j_khz") * kKhz;
  const double w = p.num("omega_mhz") * kMhz;
  const double theta = p.num("theta_pi") * kPi;
  const FrameMethod frame = parse_frame_method(p.str("frame"));
  const auto pattern = p.nums("eps_pattern");
  const int n = two ? 2 : static_cast<int>(pattern.size()) + 1;
  const auto noise_p = noise_of(p);
  const NoiseSet noise = noise_p ? NoiseSet(n, noise_p) : NoiseSet{};
  MultiqubitOptions mq;
  mq.realization = p.str("realization") == "exact" ? ZZRealization::Exact : ZZRealization::Synthesized;
  mq.cycles = static_cast<int>(p.integer("cycles"));
  mq.synthesis.frame = frame;
  const CouplingModel model = p.str("model") == "secular" ? CouplingModel::Secular : CouplingModel::Full;

  struct Variant {
    std::string name;
    CompiledGate gate;
  };
  auto build = [&](double eps, CouplingGraph& g) {
    g = chain_graph(n, j, 1);
    for (auto& e : g.edges) e.eps = two ? eps : eps * pattern[static_cast<std::size_t>(e.i)];
    std::vector<Variant> v;
    if (two) {
      v.push_back({"uncompensated", manifold_gate(theta, ManifoldKind::M1, g, w, frame)});
      v.push_back({"compensated", compensate_two_qubit(theta, ManifoldKind::M1, g, w, frame)});
    } else {
      v.push_back({"uncompensated", zz_gate(theta, g, w, mq)});
      v.push_back({"compensated", compensate_multiqubit(theta, g, w, mq)});
      v.push_back({"advanced", compensate_multiqubit_advanced(theta, g, w, mq)});
    }
    return v;
  };

  const auto eps_list = p.nums("eps");
  for (double eps : eps_list) {
    CouplingGraph g;
    for (const auto& v : build(eps, g)) check_dt(traj_config(p, ctx.seed), v.gate.schedule, g, noise);
  }
  if (ctx.dry) return;

  Vec psi0;
  if (two) {
    const Vec parts[2] = {x_eigenstate(1), x_eigenstate(-1)};
    psi0 = product_state(parts);
  } else {
    psi0 = plus_state(n);
  }
  auto csv = ctx.csv("compensate.csv", "eps,variant,fidelity,residual,total_time_s");
  ordered_json rows = ordered_json::array();
  std::uint64_t idx = 0;
  for (double eps : eps_list) {
    CouplingGraph g;
    for (const auto& v : build(eps, g)) {
      TrajectoryConfig cfg = traj_config(p, derive_seed(ctx.seed, idx++));
      cfg.model = model;
      const double total = v.gate.schedule.total_time();
      const auto ens = ensemble_density(v.gate.schedule, g, noise, psi0, cfg, {total});
      const double fid = state_fidelity(Vec(v.gate.target * psi0), ens.rho.back());
      const double res = hs_residual(schedule_propagator(v.gate.schedule, g, model), v.gate.target);
      csv.row(eps, v.name, fid, res, total);
      rows.push_back({{"eps", eps}, {"variant", v.name}, {"fidelity", fid}, {"residual", res}});
    }
  }
  ctx.summary["n_qubits"] = n;
  ctx.summary["points"] = rows;
}

void run_global_fail(const Params& p, Ctx& ctx) {
  const int n = static_cast<int>(p.integer("n_qubits"));
  const double j = p.num("j_khz") * kKhz;
  const double w = p.num("omega_mhz") * kMhz;
  const double t = p.num("theta_pi") * kPi / j;
  const CouplingGraph g = chain_graph(n, j, 1);
  const auto cycles = p.ints("cycles");
  std::vector<std::pair<CompiledGate, CompiledGate>> gates;
  for (long long c : cycles) {
    gates.emplace_back(global_addition_schedule(t, static_cast<int>(c), g, w),
                       zz_synthesis_schedule(t, static_cast<int>(c), AdditionScheme::Suzuki, g, w));
  }
  if (ctx.dry) return;

  auto csv = ctx.csv("global_fail.csv", "cycles,route,fidelity,total_time_s");
  ordered_json rows = ordered_json::array();
  for (std::size_t k = 0; k < cycles.size(); ++k) {
    const auto& [glob, frame] = gates[k];
    const double fg = gate_fidelity(schedule_propagator(glob.schedule, g), glob.target);
    const double ff = gate_fidelity(schedule_propagator(frame.schedule, g), frame.target);
    csv.row(cycles[k], "global", fg, glob.schedule.total_time());
    csv.row(cycles[k], "interaction-frame", ff, frame.schedule.total_time());
    rows.push_back({{"cycles", cycles[k]}, {"global", fg}, {"interaction_frame", ff}});
  }
  ctx.summary["points"] = rows;

  // Filter of an oscillating drive against the undriven one.
  const double t_f = p.num("filter_t_us") * 1e-6;
  const double w_osc = p.num("filter_omega_osc_mhz") * kMhz;
  const auto osc = DriveProfile::oscillating(w, w_osc, t_f);
  const auto none = DriveProfile::constant(0.0, t_f);
  auto fcsv = ctx.csv("global_filter.csv", "omega_rad_s,filter_oscillating,filter_undriven");
  for (double x : log_grid(1e3, 1e9, static_cast<int>(p.integer("filter_points")))) {
    fcsv.row(x, normalized_filter_x(osc, t_f, x), normalized_filter_x(none, t_f, x));
  }
}

void dispatch(const Params& p, Ctx& ctx) {
  const std::string& tag = p.tag();
  if (tag == "fid") return run_fid(p, ctx);
  if (tag == "t2-scan") return run_t2_scan(p, ctx);
  if (tag == "spectrum-bath") return run_spectrum_bath(p, ctx);
  if (tag == "xi-scan") return run_orientation(p, ctx, false);
  if (tag == "gap-scan") return run_orientation(p, ctx, true);
  if (tag == "gate2") return run_gate2(p, ctx);
  if (tag == "cluster") return run_cluster(p, ctx);
  if (tag == "heisenberg") return run_heisenberg(p, ctx);
  if (tag == "compensate") return run_compensate(p, ctx);
  if (tag == "global-fail") return run_global_fail(p, ctx);
  throw ConfigError("unknown experiment tag '" + tag + "'");
}

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  for (std::size_t k = 0; k < end; ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// Structural checks; fills cfg when the document is usable.
std::vector<std::string> check_document(const std::string& text, ExperimentConfig* cfg) {
  std::vector<std::string> diags;
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte);
    std::string msg = e.what();
    const auto pos = msg.find("parse error");
    if (pos != std::string::npos) msg = msg.substr(pos);
    diags.push_back("line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + msg);
    return diags;
  }
  if (!doc.is_object()) {
    diags.push_back("top level must be a JSON object");
    return diags;
  }
  const std::vector<std::string> top = {"experiment", "seed", "output_dir", "params"};
  for (const auto& [k, v] : doc.items()) {
    if (std::find(top.begin(), top.end(), k) == top.end()) {
      diags.push_back("unknown key '" + k + "'; valid keys: " + join_names(top));
    }
  }
  for (const auto& k : top) {
    if (!doc.contains(k)) diags.push_back("missing required key '" + k + "'");
  }
  if (doc.contains("seed") && !doc["seed"].is_number_unsigned()) {
    diags.push_back("seed must be a non-negative integer");
  }
  if (doc.contains("output_dir") && (!doc["output_dir"].is_string() || doc["output_dir"].get<std::string>().empty())) {
    diags.push_back("output_dir must be a non-empty string");
  }
  if (doc.contains("params") && !doc["params"].is_object()) diags.push_back("params must be an object");
  if (!doc.contains("experiment")) return diags;
  if (!doc["experiment"].is_string()) {
    diags.push_back("experiment must be a string");
    return diags;
  }
  const std::string tag = doc["experiment"].get<std::string>();
  const TagSpec* spec = find_spec(tag);
  if (!spec) {
    std::vector<std::string> tags;
    for (const auto& s : specs()) tags.push_back(s.tag);
    diags.push_back("unknown experiment tag '" + tag + "'; valid tags: " + join_names(tags));
    return diags;
  }
  if (!doc.contains("params") || !doc["params"].is_object()) return diags;

  const ordered_json& given = doc["params"];
  std::vector<std::string> names;
  for (const auto& f : spec->fields) names.push_back(f.name);
  for (const auto& [k, v] : given.items()) {
    if (std::find(names.begin(), names.end(), k) == names.end()) {
      diags.push_back("unknown key 'params." + k + "' for experiment '" + tag + "'; valid keys: " +
                      join_names(names));
    }
  }
  ordered_json params = ordered_json::object();
  for (const auto& f : spec->fields) {
    if (!given.contains(f.name)) {
      if (f.required) {
        diags.push_back("missing required key 'params." + f.name + "' for experiment '" + tag + "'");
      } else if (!f.fallback.is_null()) {
        params[f.name] = f.fallback;
      }
      continue;
    }
    const json& v = given[f.name];
    if (!kind_ok(v, f.kind)) {
      diags.push_back("params." + f.name + " (" + tag + "): must be " + kind_name(f.kind));
      continue;
    }
    params[f.name] = v;
  }
  if (!diags.empty()) return diags;

  const Params p(tag, params);
  static_checks(p, diags);
  if (!diags.empty()) return diags;

  // Compile every schedule without simulating: library preconditions and the
  // dt bound surface here.
  Ctx ctx;
  ctx.dry = true;
  ctx.seed = doc["seed"].get<std::uint64_t>();
  try {
    dispatch(p, ctx);
  } catch (const InvalidArgument& e) {
    diags.push_back("params (" + tag + "): " + e.what());
  }
  if (diags.empty() && cfg) {
    cfg->tag = tag;
    cfg->seed = ctx.seed;
    cfg->output_dir = doc["output_dir"].get<std::string>();
    cfg->params = params;
    cfg->source = doc;
  }
  return diags;
}

}  // namespace

const char* library_version() { return NVSIM_VERSION; }

const std::vector<ExperimentInfo>& experiment_catalog() {
  static const std::vector<ExperimentInfo> cat = [] {
    std::vector<ExperimentInfo> out;
    for (const auto& s : specs()) out.push_back({s.tag, s.description});
    return out;
  }();
  return cat;
}

std::vector<std::string> validate_config_text(const std::string& text) {
  return check_document(text, nullptr);
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  const auto diags = check_document(text, &cfg);
  if (!diags.empty()) {
    std::string msg;
    for (const auto& d : diags) msg += (msg.empty() ? "" : "\n") + d;
    throw ConfigError(msg);
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string sha256_hex(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  EVP_MD_CTX* md = EVP_MD_CTX_new();
  if (!md) throw std::runtime_error("EVP_MD_CTX_new failed");
  EVP_DigestInit_ex(md, EVP_sha256(), nullptr);
  char buf[1 << 15];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(md, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(md, digest, &len);
  EVP_MD_CTX_free(md);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[digest[k] >> 4];
    out += hex[digest[k] & 15];
  }
  return out;
}

RunManifest run_experiment(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  if (!find_spec(cfg.tag)) throw ConfigError("unknown experiment tag '" + cfg.tag + "'");
  fs::create_directories(cfg.output_dir);
  Ctx ctx;
  ctx.seed = cfg.seed;
  ctx.dir = cfg.output_dir;
  const Params p(cfg.tag, cfg.params);
  dispatch(p, ctx);

  ordered_json summary;
  summary["experiment"] = cfg.tag;
  summary["seed"] = cfg.seed;
  summary["results"] = ctx.summary;
  {
    std::ofstream out(cfg.output_dir / "summary.json", std::ios::binary);
    out << summary.dump(2) << '\n';
    if (!out) throw std::runtime_error("failed to write summary.json");
  }
  ctx.files.push_back("summary.json");

  RunManifest m;
  m.config = cfg.source;
  m.version = library_version();
  m.seed = cfg.seed;
  m.summary = summary;
  for (const auto& name : ctx.files) {
    const fs::path f = cfg.output_dir / name;
    m.files.push_back({name, sha256_hex(f), fs::file_size(f)});
  }
  m.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  ordered_json jm;
  jm["version"] = m.version;
  jm["seed"] = m.seed;
  jm["wall_time_s"] = m.wall_time_s;
  jm["workers"] = worker_count();
  jm["config"] = m.config;
  ordered_json files = ordered_json::array();
  for (const auto& f : m.files) files.push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  jm["files"] = files;
  std::ofstream out(cfg.output_dir / "manifest.json", std::ios::binary);
  out << jm.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed to write manifest.json");
  return m;
}

bool verify_manifest(const fs::path& manifest, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  std::ifstream in(manifest, std::ios::binary);
  if (!in) return fail("cannot read " + manifest.string());
  json jm;
  try {
    jm = json::parse(in);
  } catch (const json::exception& e) {
    return fail(e.what());
  }
  const fs::path dir = manifest.parent_path();
  for (const auto& f : jm.at("files")) {
    const fs::path path = dir / f.at("name").get<std::string>();
    if (!fs::exists(path)) return fail("missing " + path.string());
    if (sha256_hex(path) != f.at("sha256").get<std::string>()) return fail("digest mismatch for " + path.string());
  }
  return true;
}

}  // namespace nvsim
