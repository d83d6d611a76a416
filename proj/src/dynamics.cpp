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

#include "nvsim/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "nvsim/parallel.hpp"

namespace nvsim {

namespace {

constexpr std::size_t kChunk = 16;

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

Mat two_site(char a, char b, int i, int j, int n) {
  const int sites[2] = {i, j};
  return embed_local(kron(pauli(a), pauli(b)), sites, n);
}

Mat one_site(char a, int i, int n) {
  const int sites[1] = {i};
  return embed_local(pauli(a), sites, n);
}

void check_inputs(const PulseSchedule& s, const CouplingGraph& g, const NoiseSet& noise) {
  s.validate();
  g.validate();
  if (s.n_qubits() != g.n_qubits) {
    throw InvalidArgument("schedule has " + std::to_string(s.n_qubits()) +
                          " qubits but the coupling graph has " + std::to_string(g.n_qubits));
  }
  if (!noise.empty() && static_cast<int>(noise.size()) != g.n_qubits) {
    throw InvalidArgument("noise list needs one entry per qubit");
  }
  for (const auto& p : noise) {
    if (p) p->validate();
  }
}

std::vector<double> step_omegas(const Step& st, int n) {
  std::vector<double> w(n, 0.0);
  for (int q = 0; q < n && q < static_cast<int>(st.drives.size()); ++q) w[q] = st.drives[q].omega();
  return w;
}

// Eigensystem of one distinct segment Hamiltonian.
struct Spectral {
  Mat v;
  Eigen::VectorXd lambda;
  Mat propagator(double t) const {
    Eigen::VectorXcd ph(lambda.size());
    for (Eigen::Index k = 0; k < lambda.size(); ++k) ph[k] = std::polar(1.0, -lambda[k] * t);
    return v * ph.asDiagonal() * v.adjoint();
  }
};

// Schedule data shared by all trajectories.
struct Prepared {
  int n = 0;
  int dim = 0;
  double total = 0.0;
  double dt = 0.0;
  double tol = 0.0;
  std::vector<Mat> pulses;           // per step, identity when none
  std::vector<bool> has_pulses;
  std::vector<int> spectral_index;   // per step, -1 for zero duration
  std::vector<Spectral> spectra;
  std::vector<double> starts;
  std::vector<double> records;
  NoiseSet noise;
  bool noisy = false;
  // z eigenvalue of qubit q for basis index k
  std::vector<std::vector<signed char>> zsign;
};

Prepared prepare(const PulseSchedule& s, const CouplingGraph& g, const NoiseSet& noise,
                 const Vec& psi0, const TrajectoryConfig& cfg, const std::vector<double>& records) {
  check_inputs(s, g, noise);
  Prepared p;
  p.n = s.n_qubits();
  p.dim = dim_of(p.n);
  if (psi0.size() != p.dim) throw InvalidArgument("initial state dimension does not match the schedule");
  if (std::abs(psi0.norm() - 1.0) > 1e-9) throw InvalidArgument("initial state must be normalized");
  if (cfg.n_trajectories < 1) throw InvalidArgument("n_trajectories must be at least 1");
  p.noise = noise.empty() ? NoiseSet(p.n) : noise;
  for (const auto& q : p.noise) p.noisy = p.noisy || q.has_value();
  p.total = s.total_time();
  p.tol = 1e-12 * std::max(p.total, 1e-30);
  if (cfg.dt < 0.0 || !std::isfinite(cfg.dt)) throw InvalidArgument("dt must be finite and non-negative");
  if (cfg.dt > 0.0) {
    validate_dt(cfg.dt, s, g, p.noise);
    p.dt = cfg.dt;
  } else {
    p.dt = max_stable_dt(s, g, p.noise).value;
  }
  if (records.empty()) throw InvalidArgument("at least one record time is needed");
  for (std::size_t k = 0; k < records.size(); ++k) {
    if (!std::isfinite(records[k]) || records[k] < 0.0 || records[k] > p.total + p.tol) {
      throw InvalidArgument("record time " + fmt(records[k]) + " s lies outside [0, " + fmt(p.total) + "] s");
    }
    if (k > 0 && records[k] < records[k - 1]) throw InvalidArgument("record times must be ascending");
  }
  p.records = records;

  std::map<std::vector<double>, int> seen;
  double t = 0.0;
  for (const auto& st : s.steps()) {
    p.starts.push_back(t);
    t += st.duration;
    Mat u = identity(p.dim);
    for (const auto& pl : st.pulses) u = pulse_unitary(pl, p.n) * u;
    p.has_pulses.push_back(!st.pulses.empty());
    p.pulses.push_back(std::move(u));
    if (st.duration == 0.0) {
      p.spectral_index.push_back(-1);
      continue;
    }
    const auto w = step_omegas(st, p.n);
    auto it = seen.find(w);
    if (it == seen.end()) {
      Eigen::SelfAdjointEigenSolver<Mat> es(segment_hamiltonian(w, g, cfg.model));
      if (es.info() != Eigen::Success) throw NumericalError("segment diagonalization failed");
      p.spectra.push_back(Spectral{es.eigenvectors(), es.eigenvalues()});
      it = seen.emplace(w, static_cast<int>(p.spectra.size()) - 1).first;
    }
    p.spectral_index.push_back(it->second);
  }
  p.zsign.assign(p.n, std::vector<signed char>(p.dim));
  for (int q = 0; q < p.n; ++q) {
    for (int k = 0; k < p.dim; ++k) p.zsign[q][k] = ((k >> (p.n - 1 - q)) & 1) ? -1 : 1;
  }
  return p;
}

struct NoiseStream {
  std::mt19937_64 rng;
  std::normal_distribution<double> normal;
  NoiseParams params;
  OUState state;
};

}  // namespace

CouplingGraph uncoupled_graph(int n_qubits) {
  CouplingGraph g;
  g.n_qubits = n_qubits;
  g.validate();
  return g;
}

DtBound max_stable_dt(const PulseSchedule& s, const CouplingGraph& g, const NoiseSet& noise) {
  DtBound b{std::numeric_limits<double>::infinity(), "none"};
  const double w = s.max_abs_omega();
  if (w > 0.0) b = {0.05 * kTwoPi / w, "0.05*2pi/Omega_max"};
  for (const auto& p : noise) {
    if (p && p->tau / 20.0 < b.value) b = {p->tau / 20.0, "tau/20"};
  }
  const double j = g.max_abs_j();
  if (j > 0.0 && 0.05 * kTwoPi / j < b.value) b = {0.05 * kTwoPi / j, "0.05*2pi/J_max"};
  return b;
}

void validate_dt(double dt, const PulseSchedule& s, const CouplingGraph& g, const NoiseSet& noise) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be positive and finite");
  const double slack = 1.0 + 1e-12;
  const double w = s.max_abs_omega();
  if (w > 0.0 && dt > 0.05 * kTwoPi / w * slack) {
    throw InvalidArgument("dt = " + fmt(dt) + " s violates the bound 0.05*2pi/Omega_max = " +
                          fmt(0.05 * kTwoPi / w) + " s");
  }
  for (const auto& p : noise) {
    if (p && dt > p->tau / 20.0 * slack) {
      throw InvalidArgument("dt = " + fmt(dt) + " s violates the bound tau/20 = " + fmt(p->tau / 20.0) + " s");
    }
  }
  const double j = g.max_abs_j();
  if (j > 0.0 && dt > 0.05 * kTwoPi / j * slack) {
    throw InvalidArgument("dt = " + fmt(dt) + " s violates the bound 0.05*2pi/J_max = " +
                          fmt(0.05 * kTwoPi / j) + " s");
  }
}

Mat zz_hamiltonian(const CouplingGraph& g, bool include_errors) {
  g.validate();
  const int n = g.n_qubits;
  Mat h = Mat::Zero(dim_of(n), dim_of(n));
  for (const auto& e : g.edges) {
    const double j = e.j_rad_s * (include_errors ? 1.0 + e.eps : 1.0);
    h += 0.5 * j * two_site('z', 'z', e.i, e.j, n);
  }
  return h;
}

Mat segment_hamiltonian(const std::vector<double>& omegas, const CouplingGraph& g, CouplingModel model) {
  g.validate();
  const int n = g.n_qubits;
  if (static_cast<int>(omegas.size()) != n) throw InvalidArgument("need one Rabi frequency per qubit");
  Mat h = Mat::Zero(dim_of(n), dim_of(n));
  double wmax = 0.0;
  for (int q = 0; q < n; ++q) {
    if (!std::isfinite(omegas[q])) throw InvalidArgument("Rabi frequency must be finite");
    wmax = std::max(wmax, std::abs(omegas[q]));
    if (omegas[q] != 0.0) h += 0.5 * omegas[q] * one_site('x', q, n);
  }
  const double tol = 1e-9 * std::max(1.0, wmax);
  for (const auto& e : g.edges) {
    const double j = e.j_rad_s * (1.0 + e.eps);
    const Mat zz = two_site('z', 'z', e.i, e.j, n);
    if (model == CouplingModel::Full) {
      h += 0.5 * j * zz;
      continue;
    }
    const Mat yy = two_site('y', 'y', e.i, e.j, n);
    // sigma_z sigma_z = S_flipflop + S_doubleflip in the sigma_x eigenbasis.
    if (std::abs(omegas[e.i] - omegas[e.j]) <= tol) h += 0.25 * j * (zz + yy);
    if (std::abs(omegas[e.i] + omegas[e.j]) <= tol) h += 0.25 * j * (zz - yy);
  }
  return h;
}

Mat schedule_propagator(const PulseSchedule& s, const CouplingGraph& g, CouplingModel model) {
  check_inputs(s, g, {});
  const int n = s.n_qubits();
  Mat u = identity(dim_of(n));
  for (const auto& st : s.steps()) {
    for (const auto& pl : st.pulses) u = pulse_unitary(pl, n) * u;
    if (st.duration == 0.0) continue;
    const Mat h = segment_hamiltonian(step_omegas(st, n), g, model);
    u = matrix_exponential(h, st.duration) * u;
  }
  return u;
}

namespace {

// Walks the schedule, calling record(k, psi) for each record time.
void walk(const Prepared& p, const PulseSchedule& s, const Vec& psi0, std::uint64_t base_seed,
          std::uint64_t traj, const std::function<void(std::size_t, const Vec&)>& record);

}  // namespace

std::vector<Vec> evolve_trajectory(const PulseSchedule& s, const CouplingGraph& g,
                                   const NoiseSet& noise, const Vec& psi0,
                                   const TrajectoryConfig& cfg, std::uint64_t traj_index,
                                   const std::vector<double>& record_times) {
  const Prepared p = prepare(s, g, noise, psi0, cfg, record_times);
  std::vector<Vec> out(record_times.size());
  walk(p, s, psi0, cfg.base_seed, traj_index, [&](std::size_t k, const Vec& v) { out[k] = v; });
  return out;
}

EnsembleResult ensemble_density(const PulseSchedule& s, const CouplingGraph& g,
                                const NoiseSet& noise, const Vec& psi0,
                                const TrajectoryConfig& cfg,
                                const std::vector<double>& record_times,
                                const std::vector<Mat>& observables, bool keep_rho) {
  const Prepared p = prepare(s, g, noise, psi0, cfg, record_times);
  for (const auto& o : observables) {
    if (o.rows() != p.dim || o.cols() != p.dim) throw InvalidArgument("observable has the wrong dimension");
  }
  const std::size_t nt = record_times.size();
  const std::size_t no = observables.size();
  // Noiseless trajectories are identical, so one suffices.
  const std::size_t ntraj = p.noisy ? static_cast<std::size_t>(cfg.n_trajectories) : 1;
  const std::size_t nchunks = (ntraj + kChunk - 1) / kChunk;

  struct Partial {
    std::vector<Mat> rho;
    std::vector<std::vector<double>> sum, sumsq;
  };
  std::vector<Partial> parts(nchunks);
  parallel_for(nchunks, [&](std::size_t c) {
    Partial& part = parts[c];
    if (keep_rho) part.rho.assign(nt, Mat::Zero(p.dim, p.dim));
    part.sum.assign(no, std::vector<double>(nt, 0.0));
    part.sumsq.assign(no, std::vector<double>(nt, 0.0));
    const std::size_t lo = c * kChunk;
    const std::size_t hi = std::min(ntraj, lo + kChunk);
    for (std::size_t k = lo; k < hi; ++k) {
      walk(p, s, psi0, cfg.base_seed, k, [&](std::size_t r, const Vec& v) {
        if (keep_rho) part.rho[r].noalias() += v * v.adjoint();
        for (std::size_t o = 0; o < no; ++o) {
          const double x = v.dot(observables[o] * v).real();
          part.sum[o][r] += x;
          part.sumsq[o][r] += x * x;
        }
      });
    }
  });

  EnsembleResult res;
  res.times = record_times;
  res.n_trajectories = static_cast<int>(ntraj);
  if (keep_rho) res.rho.assign(nt, Mat::Zero(p.dim, p.dim));
  std::vector<std::vector<double>> sum(no, std::vector<double>(nt, 0.0));
  std::vector<std::vector<double>> sumsq(no, std::vector<double>(nt, 0.0));
  for (const auto& part : parts) {
    for (std::size_t r = 0; r < nt && keep_rho; ++r) res.rho[r] += part.rho[r];
    for (std::size_t o = 0; o < no; ++o) {
      for (std::size_t r = 0; r < nt; ++r) {
        sum[o][r] += part.sum[o][r];
        sumsq[o][r] += part.sumsq[o][r];
      }
    }
  }
  const double n = static_cast<double>(ntraj);
  for (auto& r : res.rho) {
    r /= n;
    // Exact trace one and Hermiticity against rounding.
    r = 0.5 * (r + r.adjoint()).eval();
    r /= r.trace().real();
  }
  res.mean.assign(no, std::vector<double>(nt, 0.0));
  res.stderr_.assign(no, std::vector<double>(nt, 0.0));
  for (std::size_t o = 0; o < no; ++o) {
    for (std::size_t r = 0; r < nt; ++r) {
      const double m = sum[o][r] / n;
      res.mean[o][r] = m;
      if (ntraj > 1) {
        const double var = std::max(0.0, (sumsq[o][r] - n * m * m) / (n - 1.0));
        res.stderr_[o][r] = std::sqrt(var / n);
      }
    }
  }
  return res;
}

double extract_decay_time(const std::vector<double>& t, const std::vector<double>& envelope,
                          DecayMethod method, double fit_floor) {
  if (t.size() != envelope.size()) throw InvalidArgument("decay curve: times and values differ in length");
  if (t.size() < 2) throw InvalidArgument("decay curve needs at least two samples");
  for (std::size_t k = 1; k < t.size(); ++k) {
    if (!(t[k] > t[k - 1])) throw InvalidArgument("decay curve times must be strictly ascending");
  }
  const double target = std::exp(-1.0);
  if (method == DecayMethod::OneOverE) {
    if (envelope[0] < target) throw NumericalError("decay curve starts below 1/e");
    for (std::size_t k = 1; k < t.size(); ++k) {
      if (envelope[k] < target) {
        const double f = (envelope[k - 1] - target) / (envelope[k - 1] - envelope[k]);
        return t[k - 1] + f * (t[k] - t[k - 1]);
      }
    }
    throw NumericalError("decay curve never crosses 1/e inside the sampled window (out of range)");
  }
  if (!(fit_floor > 0.0 && fit_floor < 1.0)) throw InvalidArgument("fit floor must lie in (0, 1)");
  double stt = 0.0, sty = 0.0;
  int used = 0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (envelope[k] <= fit_floor) break;
    if (t[k] <= 0.0) continue;
    const double y = std::log(std::min(envelope[k], 1.0));
    stt += t[k] * t[k];
    sty += t[k] * y;
    ++used;
  }
  if (used < 2 || !(sty < 0.0)) throw NumericalError("decay curve has too few decaying samples to fit");
  return -stt / sty;
}

namespace {

void walk(const Prepared& p, const PulseSchedule& s, const Vec& psi0, std::uint64_t base_seed,
          std::uint64_t traj, const std::function<void(std::size_t, const Vec&)>& record) {
  std::vector<std::optional<NoiseStream>> streams(p.n);
  for (int q = 0; q < p.n; ++q) {
    if (!p.noise[q]) continue;
    NoiseStream ns{std::mt19937_64(derive_seed(base_seed, traj, static_cast<std::uint64_t>(q))), {},
                   *p.noise[q], {}};
    ns.state = OUState{ns.params.b_rms * ns.normal(ns.rng), 0.0};
    streams[q] = std::move(ns);
  }
  std::vector<double> dy(p.n, 0.0);

  auto kick = [&](Vec& v, const std::vector<OUStepper>& steppers) {
    for (int q = 0; q < p.n; ++q) {
      if (!streams[q]) continue;
      NoiseStream& ns = *streams[q];
      const double n1 = ns.normal(ns.rng);
      const double n2 = ns.normal(ns.rng);
      const OUState next = steppers[q].step(ns.state, n1, n2);
      dy[q] = next.y - ns.state.y;
      ns.state = OUState{next.b, 0.0};
    }
    for (int k = 0; k < p.dim; ++k) {
      double a = 0.0;
      for (int q = 0; q < p.n; ++q) {
        if (streams[q]) a += p.zsign[q][k] * dy[q];
      }
      v[k] *= std::polar(1.0, -0.5 * a);
    }
  };

  auto evolve = [&](Vec& v, const Spectral& sp, double len) {
    if (len <= 0.0) return;
    if (!p.noisy) {
      v = sp.propagator(len) * v;
      return;
    }
    const long m = std::isfinite(p.dt)
                       ? std::max(1L, static_cast<long>(std::ceil(len / p.dt * (1.0 - 1e-12))))
                       : 1L;
    const double h = len / static_cast<double>(m);
    const Mat half = sp.propagator(0.5 * h);
    const Mat full = sp.propagator(h);
    std::vector<OUStepper> steppers;
    steppers.reserve(p.n);
    for (int q = 0; q < p.n; ++q) steppers.emplace_back(p.noise[q] ? *p.noise[q] : NoiseParams{1.0, 1.0}, h);
    Vec a = half * v;
    Vec b(p.dim);
    for (long k = 0; k < m; ++k) {
      kick(a, steppers);
      b.noalias() = (k + 1 < m ? full : half) * a;
      a.swap(b);
    }
    v = std::move(a);
  };

  Vec psi = psi0;
  std::size_t rec = 0;
  auto flush = [&](double upto) {
    while (rec < p.records.size() && p.records[rec] <= upto + p.tol) record(rec++, psi);
  };

  const auto& steps = s.steps();
  for (std::size_t k = 0; k < steps.size(); ++k) {
    if (p.has_pulses[k]) psi = p.pulses[k] * psi;
    const int si = p.spectral_index[k];
    if (si < 0) continue;
    const double t0 = p.starts[k];
    const double t1 = t0 + steps[k].duration;
    flush(t0);
    double t = t0;
    while (rec < p.records.size() && p.records[rec] < t1 - p.tol) {
      evolve(psi, p.spectra[si], p.records[rec] - t);
      t = p.records[rec];
      flush(t);
    }
    evolve(psi, p.spectra[si], t1 - t);
  }
  flush(p.total);
}

}  // namespace

}  // namespace nvsim
