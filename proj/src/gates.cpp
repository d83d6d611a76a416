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

#include "nvsim/gates.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nvsim {

namespace {

Mat two_site(char a, char b, int i, int j, int n) {
  const int sites[2] = {i, j};
  return embed_local(kron(pauli(a), pauli(b)), sites, n);
}

double realized(const CouplingEdge& e, bool include_errors) {
  return e.j_rad_s * (include_errors ? 1.0 + e.eps : 1.0);
}

// Coupling part that survives in the frame of a drive with these signs.
Mat secular_coupling(const CouplingGraph& g, const std::vector<int>& signs, bool include_errors) {
  const int n = g.n_qubits;
  Mat h = Mat::Zero(dim_of(n), dim_of(n));
  for (const auto& e : g.edges) {
    const double j = realized(e, include_errors);
    const Mat zz = two_site('z', 'z', e.i, e.j, n);
    const Mat yy = two_site('y', 'y', e.i, e.j, n);
    if (signs[e.i] == signs[e.j]) {
      h += 0.25 * j * (zz + yy);
    } else {
      h += 0.25 * j * (zz - yy);
    }
  }
  return h;
}

double coupling_scale(const CouplingGraph& g) {
  double r = 0.0;
  for (const auto& e : g.edges) r += 0.5 * std::abs(realized(e, true));
  return r;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

double wrap_angle(double a) {
  // exp(-i a/2 sigma) has period 4pi.
  const double r = std::fmod(a, 2.0 * kTwoPi);
  return r;
}

// Accumulates a schedule together with the ideal unitary each block is meant
// to realize and a bound on how far the physical block may stray from it.
class Builder {
 public:
  Builder(const CouplingGraph& g, double omega) : g_(g), omega_(omega), schedule_(g.n_qubits) {
    g_.validate();
    if (!(omega >= 0.0) || !std::isfinite(omega)) throw InvalidArgument("drive amplitude must be non-negative");
    n_ = g.n_qubits;
    ideal_ = identity(dim_of(n_));
    const double jmax = g.max_abs_j();
    if (omega > 0.0 && jmax > 0.0 && omega / jmax < 20.0) {
      warnings_.push_back("Omega/J = " + fmt(omega / jmax) + " is below 20; the manifold picture is inaccurate");
    }
  }

  int n() const { return n_; }
  const CouplingGraph& graph() const { return g_; }
  double omega() const { return omega_; }

  void pulse(const std::vector<int>& qubits, char axis, double angle) {
    if (qubits.empty()) return;
    Pulse p{qubits, axis, wrap_angle(angle)};
    if (p.angle == 0.0) return;
    ideal_ = pulse_unitary(p, n_) * ideal_;
    schedule_.add_pulse(std::move(p));
  }

  // One interaction-frame block for drive signs `signs` and interaction time t.
  void manifold_block(const std::vector<int>& signs, double t, FrameMethod method) {
    if (t < 0.0 || !std::isfinite(t)) throw InvalidArgument("block duration must be non-negative");
    if (t == 0.0) return;
    std::vector<double> w(n_);
    for (int q = 0; q < n_; ++q) w[q] = signs[q] * omega_;
    const Mat hsec = secular_coupling(g_, signs, true);
    const double r = coupling_scale(g_);
    if (omega_ == 0.0) {
      // No frame to average in: the full coupling acts and the rotating part
      // is a static error.
      schedule_.add_segment(t, w);
      ideal_ = matrix_exponential(hsec, t) * ideal_;
      frame_err_ += r * t;
      return;
    }
    std::vector<int> all(n_);
    for (int q = 0; q < n_; ++q) all[q] = q;
    double t_phys = t;
    switch (method) {
      case FrameMethod::TimeAdjust:
        t_phys = time_adjusted_duration(t, omega_);
        schedule_.add_segment(t_phys, w);
        break;
      case FrameMethod::Echo:
        schedule_.add_segment(0.5 * t, w);
        pulse_raw(all, 'z', kPi);
        schedule_.add_segment(0.5 * t, w);
        pulse_raw(all, 'z', -kPi);
        break;
      case FrameMethod::Direct: {
        schedule_.add_segment(t, w);
        std::vector<int> plus, minus;
        for (int q = 0; q < n_; ++q) (signs[q] > 0 ? plus : minus).push_back(q);
        // Undo exp(-i w t/2 sigma_x) with fast x rotations.
        pulse_raw(plus, 'x', -omega_ * t);
        pulse_raw(minus, 'x', omega_ * t);
        break;
      }
    }
    // Frame pulses (echo, direct) cancel the drive exactly for the secular
    // coupling, so the block ideal is exp(-i hsec t_phys).
    ideal_ = matrix_exponential(hsec, t_phys) * ideal_;
    const double bound = 2.0 * (r + 3.0 * r * r * t_phys) / omega_;
    frame_err_ += (method == FrameMethod::Echo ? 2.0 : 1.0) * bound;
  }

  void manifold_block(ManifoldKind kind, double t, FrameMethod method, SwitchMode sw) {
    if (kind == ManifoldKind::M2 && sw == SwitchMode::Conjugation) {
      const auto col = g_.colouring();
      if (col.empty()) throw InvalidArgument("M2 needs a bipartite nearest-neighbour graph");
      std::vector<int> nc;
      for (int q = 0; q < n_; ++q) {
        if (col[q] == 1) nc.push_back(q);
      }
      pulse(nc, 'z', -kPi);
      manifold_block(manifold_signs(g_, ManifoldKind::M1), t, method);
      pulse(nc, 'z', kPi);
      return;
    }
    manifold_block(manifold_signs(g_, kind), t, method);
  }

  // Undriven evolution under the full coupling.
  void bare_zz(double t) {
    if (t <= 0.0) return;
    schedule_.add_segment(t, std::vector<double>(n_, 0.0));
    ideal_ = matrix_exponential(zz_hamiltonian(g_, true), t) * ideal_;
  }

  // Lab-frame segment whose ideal is its own exact propagator.
  void raw_segment(const std::vector<double>& w, double t) {
    if (t <= 0.0) return;
    schedule_.add_segment(t, w);
    ideal_ = matrix_exponential(segment_hamiltonian(w, g_, CouplingModel::Full), t) * ideal_;
  }

  void append(const Builder& other) {
    schedule_.append(other.schedule_);
    ideal_ = other.ideal_ * ideal_;
    frame_err_ += other.frame_err_;
    for (const auto& w : other.warnings_) {
      if (std::find(warnings_.begin(), warnings_.end(), w) == warnings_.end()) warnings_.push_back(w);
    }
  }

  CompiledGate finish(Mat target) const {
    CompiledGate out;
    out.schedule = schedule_;
    out.schedule.validate();
    const double d = static_cast<double>(dim_of(n_));
    const double cap = std::sqrt(2.0 * d);
    out.error_budget = std::min(cap, hs_residual(ideal_, target) + std::sqrt(d) * frame_err_);
    out.target = std::move(target);
    out.warnings = warnings_;
    return out;
  }

 private:
  // Pulse that is part of the physical frame correction, not of the ideal.
  void pulse_raw(const std::vector<int>& qubits, char axis, double angle) {
    if (qubits.empty()) return;
    Pulse p{qubits, axis, wrap_angle(angle)};
    if (p.angle == 0.0) return;
    schedule_.add_pulse(std::move(p));
  }

  CouplingGraph g_;
  double omega_ = 0.0;
  int n_ = 0;
  PulseSchedule schedule_;
  Mat ideal_;
  double frame_err_ = 0.0;
  std::vector<std::string> warnings_;
};

std::vector<int> colour_class(const CouplingGraph& g, int c) {
  const auto col = g.colouring();
  if (col.empty()) throw InvalidArgument("operation needs a bipartite nearest-neighbour graph");
  std::vector<int> out;
  for (int q = 0; q < g.n_qubits; ++q) {
    if (col[q] == c) out.push_back(q);
  }
  return out;
}

void check_precondition(double omega, double t, int cycles) {
  if (cycles < 1) throw InvalidArgument("need at least one cycle");
  if (!(omega * t / cycles > kTwoPi)) {
    throw InvalidArgument("precondition Omega t / n > 2pi violated: Omega t / n = " +
                          fmt(omega * t / cycles) + " rad");
  }
}

void synthesize_into(Builder& b, double t, int cycles, AdditionScheme scheme, const SynthesisOptions& o) {
  if (t == 0.0) return;
  check_precondition(b.omega(), t, cycles);
  const double h = t / cycles;
  for (int c = 0; c < cycles; ++c) {
    if (scheme == AdditionScheme::Suzuki) {
      b.manifold_block(ManifoldKind::M1, 0.5 * h, o.frame, o.switching);
      b.manifold_block(ManifoldKind::M2, h, o.frame, o.switching);
      b.manifold_block(ManifoldKind::M1, 0.5 * h, o.frame, o.switching);
    } else {
      b.manifold_block(ManifoldKind::M2, h, o.frame, o.switching);
      b.manifold_block(ManifoldKind::M1, h, o.frame, o.switching);
    }
  }
}

Mat nn_zz_hamiltonian(const CouplingGraph& g, bool include_errors) {
  CouplingGraph nn = g;
  nn.edges = g.edges_up_to(1);
  return zz_hamiltonian(nn, include_errors);
}

// Sites of a path or cycle in walking order; empty if the nearest-neighbour
// graph is neither.
std::vector<int> walk_order(const CouplingGraph& g, bool* cyclic) {
  const int n = g.n_qubits;
  std::vector<std::vector<int>> adj(n);
  for (const auto& e : g.edges) {
    if (e.order != 1) continue;
    adj[e.i].push_back(e.j);
    adj[e.j].push_back(e.i);
  }
  int start = 0;
  int ends = 0;
  for (int q = 0; q < n; ++q) {
    if (adj[q].size() > 2 || adj[q].empty()) return {};
    if (adj[q].size() == 1) {
      if (ends == 0) start = q;
      ++ends;
    }
  }
  if (ends != 0 && ends != 2) return {};
  *cyclic = ends == 0;
  std::vector<int> order{start};
  int prev = -1, cur = start;
  while (static_cast<int>(order.size()) < n) {
    int next = -1;
    for (int v : adj[cur]) {
      if (v != prev && std::find(order.begin(), order.end(), v) == order.end()) {
        next = v;
        break;
      }
    }
    if (next < 0) return {};
    order.push_back(next);
    prev = cur;
    cur = next;
  }
  return order;
}

void zz_block(Builder& b, double t, const MultiqubitOptions& o) {
  if (o.realization == ZZRealization::Exact) {
    b.bare_zz(t);
  } else {
    synthesize_into(b, t, o.cycles, AdditionScheme::Suzuki, o.synthesis);
  }
}

void check_multiqubit_graph(const CouplingGraph& g, const MultiqubitOptions& o) {
  g.validate();
  for (const auto& e : g.edges) {
    if (e.order > 1 && !o.odd_orders_eliminated) {
      throw InvalidArgument(
          "couplings beyond nearest neighbours are present; eliminate them (nnn elimination) "
          "before compensating");
    }
  }
}

}  // namespace

ManifoldKind parse_manifold(const std::string& s) {
  if (s == "M1" || s == "m1") return ManifoldKind::M1;
  if (s == "M2" || s == "m2") return ManifoldKind::M2;
  if (s == "M3" || s == "m3") return ManifoldKind::M3;
  throw InvalidArgument("unknown manifold '" + s + "' (valid: M1, M2, M3)");
}

FrameMethod parse_frame_method(const std::string& s) {
  if (s == "time-adjust") return FrameMethod::TimeAdjust;
  if (s == "echo") return FrameMethod::Echo;
  if (s == "direct") return FrameMethod::Direct;
  throw InvalidArgument("unknown frame method '" + s + "' (valid: time-adjust, echo, direct)");
}

AdditionScheme parse_scheme(const std::string& s) {
  if (s == "suzuki") return AdditionScheme::Suzuki;
  if (s == "trotter") return AdditionScheme::Trotter;
  throw InvalidArgument("unknown addition scheme '" + s + "' (valid: suzuki, trotter)");
}

CouplingGraph chain_graph(int n, double j_nn, int cutoff_order) {
  if (n < 1) throw InvalidArgument("chain needs at least one qubit");
  if (cutoff_order < 1) throw InvalidArgument("cutoff order must be at least 1");
  CouplingGraph g;
  g.n_qubits = n;
  for (int k = 1; k <= cutoff_order; ++k) {
    for (int i = 0; i + k < n; ++i) {
      CouplingEdge e;
      e.i = i;
      e.j = i + k;
      e.j_rad_s = j_nn / (k * k * k);
      e.order = k;
      e.r_nm = 10.0 * k;
      g.edges.push_back(e);
    }
  }
  g.validate();
  return g;
}

CouplingGraph square_graph(double j_nn, int cutoff_order) {
  if (cutoff_order < 1) throw InvalidArgument("cutoff order must be at least 1");
  CouplingGraph g;
  g.n_qubits = 4;
  for (int i = 0; i < 4; ++i) {
    CouplingEdge e;
    e.i = std::min(i, (i + 1) % 4);
    e.j = std::max(i, (i + 1) % 4);
    e.j_rad_s = j_nn;
    e.r_nm = 10.0;
    g.edges.push_back(e);
  }
  if (cutoff_order >= 2) {
    for (auto [i, j] : {std::pair{0, 2}, std::pair{1, 3}}) {
      CouplingEdge e;
      e.i = i;
      e.j = j;
      e.j_rad_s = j_nn / std::pow(2.0, 1.5);
      e.order = 2;
      e.r_nm = 10.0 * std::sqrt(2.0);
      g.edges.push_back(e);
    }
  }
  g.validate();
  return g;
}

std::vector<int> manifold_signs(const CouplingGraph& g, ManifoldKind kind) {
  g.validate();
  switch (kind) {
    case ManifoldKind::M1: return std::vector<int>(g.n_qubits, 1);
    case ManifoldKind::M3: return std::vector<int>(g.n_qubits, -1);
    case ManifoldKind::M2: {
      const auto col = g.colouring();
      if (col.empty()) throw InvalidArgument("M2 needs a bipartite nearest-neighbour graph");
      std::vector<int> s(g.n_qubits);
      for (int q = 0; q < g.n_qubits; ++q) s[q] = col[q] == 0 ? 1 : -1;
      return s;
    }
  }
  throw InvalidArgument("unknown manifold");
}

Mat manifold_hamiltonian(const CouplingGraph& g, ManifoldKind kind, bool include_errors) {
  return secular_coupling(g, manifold_signs(g, kind), include_errors);
}

double time_adjusted_duration(double t, double omega) {
  if (t < 0.0 || !std::isfinite(t)) throw InvalidArgument("duration must be non-negative");
  if (omega == 0.0 || t == 0.0) return t;
  const double w = std::abs(omega);
  const double m = std::fmod(w * t, kTwoPi);
  if (m < 1e-9 || kTwoPi - m < 1e-9) return t;
  return t + (kTwoPi - m) / w;
}

CompiledGate interaction_frame_schedule(ManifoldKind kind, double t, const CouplingGraph& g,
                                        double omega, FrameMethod method) {
  Builder b(g, omega);
  b.manifold_block(kind, t, method, SwitchMode::DrivePhase);
  return b.finish(matrix_exponential(manifold_hamiltonian(g, kind), t));
}

CompiledGate zz_synthesis_schedule(double t, int cycles, AdditionScheme scheme,
                                   const CouplingGraph& g, double omega,
                                   const SynthesisOptions& opts) {
  if (t < 0.0 || !std::isfinite(t)) throw InvalidArgument("duration must be non-negative");
  Builder b(g, omega);
  synthesize_into(b, t, cycles, scheme, opts);
  const Mat h = manifold_hamiltonian(g, ManifoldKind::M1) + manifold_hamiltonian(g, ManifoldKind::M2);
  return b.finish(matrix_exponential(h, t));
}

CompiledGate global_addition_schedule(double t, int cycles, const CouplingGraph& g, double omega) {
  if (t < 0.0 || !std::isfinite(t)) throw InvalidArgument("duration must be non-negative");
  if (cycles < 1) throw InvalidArgument("need at least one cycle");
  Builder b(g, omega);
  // H_M1 + H_M3 = 2 H_zz, so the sequence runs for t/2.
  const double h = 0.5 * t / cycles;
  const std::vector<double> plus(g.n_qubits, omega), minus(g.n_qubits, -omega);
  for (int c = 0; c < cycles; ++c) {
    b.raw_segment(plus, 0.5 * h);
    b.raw_segment(minus, h);
    b.raw_segment(plus, 0.5 * h);
  }
  return b.finish(matrix_exponential(zz_hamiltonian(g, true), t));
}

double two_qubit_compensation_phi(double theta) {
  const double c = -theta / (4.0 * kPi);
  if (!std::isfinite(theta) || std::abs(c) > 1.0) {
    throw InvalidArgument("no compensation angle: |theta / 4pi| must be at most 1");
  }
  return std::acos(c);
}

double multiqubit_compensation_phi(double theta) {
  const double c = -theta / (8.0 * kPi);
  if (!std::isfinite(theta) || std::abs(c) > 1.0) {
    throw InvalidArgument("no compensation angle: |theta / 8pi| must be at most 1");
  }
  return std::acos(c);
}

namespace {

void check_two_qubit(const CouplingGraph& g) {
  g.validate();
  if (g.n_qubits != 2) throw InvalidArgument("two-qubit gate needs a two-qubit graph");
}

// T_phi = exp(-i phi/2 sigma_z^M), with sigma_z^{M1} = (X1 - X2)/2 and
// sigma_z^{M2} = (X1 + X2)/2 on the gate manifold.
void manifold_tilt(Builder& b, ManifoldKind kind, double phi) {
  const double a1 = 0.5 * phi;
  const double a2 = kind == ManifoldKind::M2 ? 0.5 * phi : -0.5 * phi;
  b.pulse({0}, 'x', a1);
  b.pulse({1}, 'x', a2);
}

}  // namespace

CompiledGate manifold_gate(double theta, ManifoldKind kind, const CouplingGraph& g, double omega,
                           FrameMethod method) {
  check_two_qubit(g);
  const double j = g.nominal_j();
  Builder b(g, omega);
  b.manifold_block(kind, theta / j, method, SwitchMode::DrivePhase);
  return b.finish(matrix_exponential(manifold_hamiltonian(g, kind, false), theta / j));
}

CompiledGate compensate_two_qubit(double theta, ManifoldKind kind, const CouplingGraph& g,
                                  double omega, FrameMethod method) {
  check_two_qubit(g);
  const double phi = two_qubit_compensation_phi(theta);
  const double j = g.nominal_j();
  Builder b(g, omega);
  b.manifold_block(kind, theta / j, method, SwitchMode::DrivePhase);
  const std::pair<double, double> tilts[] = {{phi, kPi}, {3.0 * phi, kTwoPi}, {phi, kPi}};
  for (const auto& [p, angle] : tilts) {
    manifold_tilt(b, kind, -p);
    b.manifold_block(kind, angle / j, method, SwitchMode::DrivePhase);
    manifold_tilt(b, kind, p);
  }
  return b.finish(matrix_exponential(manifold_hamiltonian(g, kind, false), theta / j));
}

CompiledGate zz_gate(double theta, const CouplingGraph& g, double omega, const MultiqubitOptions& opts) {
  check_multiqubit_graph(g, opts);
  const double j = g.nominal_j();
  Builder b(g, omega);
  zz_block(b, theta / j, opts);
  return b.finish(matrix_exponential(nn_zz_hamiltonian(g, false), theta / j));
}

CompiledGate compensate_multiqubit(double theta, const CouplingGraph& g, double omega,
                                   const MultiqubitOptions& opts) {
  check_multiqubit_graph(g, opts);
  const double phi = multiqubit_compensation_phi(theta);
  const double j = g.nominal_j();
  const auto nc = colour_class(g, 1);
  Builder b(g, omega);
  zz_block(b, theta / j, opts);
  const std::pair<double, double> tilts[] = {{phi, kTwoPi}, {-phi, 2.0 * kTwoPi}, {phi, kTwoPi}};
  for (const auto& [p, angle] : tilts) {
    b.pulse(nc, 'x', -p);
    zz_block(b, angle / j, opts);
    b.pulse(nc, 'x', p);
  }
  return b.finish(matrix_exponential(nn_zz_hamiltonian(g, false), theta / j));
}

CompiledGate compensate_multiqubit_advanced(double theta, const CouplingGraph& g, double omega,
                                            const MultiqubitOptions& opts) {
  check_multiqubit_graph(g, opts);
  const double phi = two_qubit_compensation_phi(theta);
  const double j = g.nominal_j();
  const auto nc = colour_class(g, 1);
  Builder b(g, omega);
  zz_block(b, theta / j, opts);
  const std::pair<double, double> tilts[] = {{phi, kPi}, {3.0 * phi, kTwoPi}, {phi, kPi}};
  for (const auto& [p, angle] : tilts) {
    b.pulse(nc, 'x', -p);
    zz_block(b, angle / j, opts);
    b.pulse(nc, 'x', p);
  }
  return b.finish(matrix_exponential(nn_zz_hamiltonian(g, false), theta / j));
}

CompiledGate nnn_elimination_schedule(const CouplingGraph& g, double t, double omega, int cycles,
                                      const SynthesisOptions& opts) {
  g.validate();
  bool has_higher = false;
  for (const auto& e : g.edges) has_higher = has_higher || e.order > 1;
  if (!has_higher) {
    CompiledGate plain = zz_synthesis_schedule(t, cycles, AdditionScheme::Suzuki, g, omega, opts);
    return plain;
  }
  bool cyclic = false;
  const auto order = walk_order(g, &cyclic);
  if (order.empty()) throw InvalidArgument("nnn elimination supports chains and square rings only");
  const int n = g.n_qubits;
  if (cyclic && n % 4 != 0) throw InvalidArgument("nnn elimination on a ring needs a multiple of 4 sites");
  // Sign patterns along the walk: A = (+,+,-,-,...), B = (+,-,-,+,...).
  std::vector<int> flip_a, flip_b;
  for (int k = 0; k < n; ++k) {
    if ((k / 2) % 2 == 1) flip_a.push_back(order[k]);
    if (((k + 1) / 2) % 2 == 1) flip_b.push_back(order[k]);
  }
  std::sort(flip_a.begin(), flip_a.end());
  std::sort(flip_b.begin(), flip_b.end());
  // Per cycle of length tau: A(tau/4) B(tau/4) plain(tau) B(tau/4) A(tau/4),
  // where A and B are the zz evolution conjugated by x pi pulses on the
  // flipped sites. Nearest-neighbour time adds to tau, second-neighbour time
  // to zero, and the palindrome keeps the leftover commutators second order.
  Builder b(g, omega);
  const double tau = t / cycles;
  auto flipped = [&](const std::vector<int>& flips, double s) {
    b.pulse(flips, 'x', -kPi);
    synthesize_into(b, s, 1, AdditionScheme::Suzuki, opts);
    b.pulse(flips, 'x', kPi);
  };
  for (int c = 0; c < cycles; ++c) {
    flipped(flip_a, 0.25 * tau);
    flipped(flip_b, 0.25 * tau);
    synthesize_into(b, tau, 1, AdditionScheme::Suzuki, opts);
    flipped(flip_b, 0.25 * tau);
    flipped(flip_a, 0.25 * tau);
  }
  return b.finish(matrix_exponential(nn_zz_hamiltonian(g, true), t));
}

Vec cluster_state(const CouplingGraph& g) {
  g.validate();
  const int n = g.n_qubits;
  const int d = dim_of(n);
  Vec psi = plus_state(n);
  for (int k = 0; k < d; ++k) {
    int parity = 0;
    for (const auto& e : g.edges) {
      if (e.order != 1) continue;
      const int bi = (k >> (n - 1 - e.i)) & 1;
      const int bj = (k >> (n - 1 - e.j)) & 1;
      parity ^= bi & bj;
    }
    if (parity) psi[k] = -psi[k];
  }
  return psi;
}

std::vector<Mat> cluster_stabilizers(const CouplingGraph& g) {
  g.validate();
  const int n = g.n_qubits;
  std::vector<Mat> out;
  for (int i = 0; i < n; ++i) {
    std::string s(n, 'I');
    s[i] = 'X';
    for (const auto& e : g.edges) {
      if (e.order != 1) continue;
      if (e.i == i) s[e.j] = 'Z';
      if (e.j == i) s[e.i] = 'Z';
    }
    Mat op = identity(1);
    for (char c : s) op = kron(op, c == 'I' ? identity(2) : pauli(static_cast<char>(std::tolower(c))));
    out.push_back(op);
  }
  return out;
}

CompiledGate cluster_state_schedule(const CouplingGraph& g, double omega, int cycles,
                                    const SynthesisOptions& opts) {
  g.validate();
  const double j = g.nominal_j();
  const double t = kPi / (2.0 * j);
  bool has_higher = false;
  for (const auto& e : g.edges) has_higher = has_higher || e.order > 1;
  Builder b(g, omega);
  CompiledGate zz = has_higher ? nnn_elimination_schedule(g, t, omega, cycles, opts)
                               : zz_synthesis_schedule(t, cycles, AdditionScheme::Suzuki, g, omega, opts);
  const int n = g.n_qubits;
  const auto deg = g.degrees(1);
  PulseSchedule s = zz.schedule;
  Mat corr = identity(dim_of(n));
  for (int q = 0; q < n; ++q) {
    if (deg[q] == 0) continue;
    Pulse p{{q}, 'z', -0.5 * kPi * deg[q]};
    corr = pulse_unitary(p, n) * corr;
    s.add_pulse(p);
  }
  // Product of controlled-Z over nearest-neighbour edges.
  Mat cz = Mat::Identity(dim_of(n), dim_of(n));
  const Vec signs = cluster_state(g).cwiseQuotient(plus_state(n));
  for (int k = 0; k < dim_of(n); ++k) cz(k, k) = signs[k];
  CompiledGate out;
  out.schedule = s;
  out.target = cz;
  // Local corrections are exact, so they map the zz residual unchanged.
  const double d = static_cast<double>(dim_of(n));
  out.error_budget = std::min(std::sqrt(2.0 * d),
                              zz.error_budget + hs_residual(corr * zz.target, cz));
  out.warnings = zz.warnings;
  return out;
}

PipelineResult two_qubit_gate_pipeline(double theta, ManifoldKind kind, const CouplingGraph& g,
                                       double omega, const NoiseSet& noise,
                                       const TrajectoryConfig& cfg, FrameMethod method) {
  PipelineResult res;
  res.gate = manifold_gate(theta, kind, g, omega, method);
  const Vec a = x_eigenstate(1);
  const Vec b = x_eigenstate(kind == ManifoldKind::M1 ? -1 : 1);
  const Vec singles[2] = {a, b};
  const Vec psi0 = product_state(singles);
  const double total = res.gate.schedule.total_time();
  auto ens = ensemble_density(res.gate.schedule, g, noise, psi0, cfg, {total});
  res.rho = ens.rho.back();
  res.fidelity = state_fidelity(Vec(res.gate.target * psi0), res.rho);
  return res;
}

PipelineResult cluster_state_pipeline(const CouplingGraph& g, double omega, int cycles,
                                      const NoiseSet& noise, const TrajectoryConfig& cfg,
                                      const SynthesisOptions& opts) {
  PipelineResult res;
  res.gate = cluster_state_schedule(g, omega, cycles, opts);
  const Vec psi0 = plus_state(g.n_qubits);
  const double total = res.gate.schedule.total_time();
  auto ens = ensemble_density(res.gate.schedule, g, noise, psi0, cfg, {total});
  res.rho = ens.rho.back();
  res.fidelity = state_fidelity(cluster_state(g), res.rho);
  return res;
}

Mat heisenberg_hamiltonian(const CouplingGraph& g, double delta) {
  g.validate();
  const int n = g.n_qubits;
  Mat h = Mat::Zero(dim_of(n), dim_of(n));
  for (const auto& e : g.edges) {
    if (e.order != 1) continue;
    const double j = e.j_rad_s;
    h -= 0.5 * (delta * j * two_site('x', 'x', e.i, e.j, n) +
                j * (two_site('y', 'y', e.i, e.j, n) + two_site('z', 'z', e.i, e.j, n)));
  }
  return h;
}

CompiledGate heisenberg_schedule(const CouplingGraph& g, double delta, double theta, double omega,
                                 int cycles, const SynthesisOptions& opts) {
  g.validate();
  if (cycles < 1) throw InvalidArgument("need at least one cycle");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw InvalidArgument("delta must be non-negative");
  const double j = g.nominal_j();
  const double t = theta / j;
  const Mat target = matrix_exponential(heisenberg_hamiltonian(g, delta), t);
  Builder b(g, omega);
  if (theta == 0.0) return b.finish(target);
  const auto f = colour_class(g, 1);
  std::vector<int> all(g.n_qubits);
  for (int q = 0; q < g.n_qubits; ++q) all[q] = q;
  const double tau = t / cycles;
  auto block_a = [&](double s) {
    // U_x F zz(delta s) F^dag U_x^dag with U_x = exp(-i pi/4 sigma_y).
    b.pulse(all, 'y', -0.5 * kPi);
    b.pulse(f, 'x', -kPi);
    synthesize_into(b, delta * s, 1, AdditionScheme::Suzuki, opts);
    b.pulse(f, 'x', kPi);
    b.pulse(all, 'y', 0.5 * kPi);
  };
  auto block_b = [&](double s) {
    b.pulse(f, 'x', -kPi);
    b.manifold_block(ManifoldKind::M1, 2.0 * s, opts.frame, opts.switching);
    b.pulse(f, 'x', kPi);
  };
  for (int c = 0; c < cycles; ++c) {
    block_a(0.5 * tau);
    block_b(tau);
    block_a(0.5 * tau);
  }
  return b.finish(target);
}

HeisenbergResult heisenberg_pipeline(int n_qubits, double delta, double theta, double omega,
                                     int cycles, const NoiseSet& noise, const TrajectoryConfig& cfg,
                                     int cutoff_order, double j_nn, const SynthesisOptions& opts) {
  if (n_qubits < 2 || n_qubits > 6) throw InvalidArgument("Heisenberg chain supports 2 to 6 qubits");
  const CouplingGraph g = chain_graph(n_qubits, j_nn, cutoff_order);
  HeisenbergResult res;
  res.gate = heisenberg_schedule(g, delta, theta, omega, cycles, opts);
  const Mat u = schedule_propagator(res.gate.schedule, g, cfg.model);
  res.hs_distance = hs_distance(u, res.gate.target);
  bool noisy = false;
  for (const auto& p : noise) noisy = noisy || p.has_value();
  if (noisy) {
    std::uint64_t neel = 0;
    for (int q = 1; q < n_qubits; q += 2) neel |= 1ULL << (n_qubits - 1 - q);
    const Vec psi0 = basis_state(n_qubits, neel);
    const double total = res.gate.schedule.total_time();
    auto ens = ensemble_density(res.gate.schedule, g, noise, psi0, cfg, {total});
    res.fidelity = state_fidelity(Vec(res.gate.target * psi0), ens.rho.back());
  }
  return res;
}

double gate_fidelity(const Mat& u, const Mat& target) {
  if (u.rows() != target.rows() || u.cols() != target.cols()) {
    throw InvalidArgument("gate fidelity: dimension mismatch");
  }
  const double d = static_cast<double>(u.rows());
  return std::norm((u.adjoint() * target).trace() / d);
}

}  // namespace nvsim
