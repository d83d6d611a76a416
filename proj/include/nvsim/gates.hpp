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

#ifndef NVSIM_GATES_HPP
#define NVSIM_GATES_HPP

#include <string>
#include <vector>

#include "nvsim/core.hpp"
#include "nvsim/dynamics.hpp"
#include "nvsim/nv_hamiltonian.hpp"
#include "nvsim/schedule.hpp"

namespace nvsim {

// M1: every qubit driven at +Omega. M2: the two colour classes of the
// nearest-neighbour graph driven at +Omega and -Omega. M3: every qubit at -Omega.
enum class ManifoldKind { M1, M2, M3 };
enum class FrameMethod { TimeAdjust, Echo, Direct };
enum class SwitchMode { DrivePhase, Conjugation };
enum class AdditionScheme { Trotter, Suzuki };
enum class ZZRealization { Exact, Synthesized };

ManifoldKind parse_manifold(const std::string& s);
FrameMethod parse_frame_method(const std::string& s);
AdditionScheme parse_scheme(const std::string& s);

struct SynthesisOptions {
  FrameMethod frame = FrameMethod::TimeAdjust;
  SwitchMode switching = SwitchMode::DrivePhase;
};

// A compiled schedule with the unitary it is meant to realize. error_budget
// bounds the phase-gauged Frobenius residual (hs_residual) between the
// noiseless schedule propagator under the full coupling model and target.
struct CompiledGate {
  PulseSchedule schedule;
  Mat target;
  double error_budget = 0.0;
  std::vector<std::string> warnings;
};

// Chain with couplings J / k^3 between qubits k sites apart, k <= cutoff.
CouplingGraph chain_graph(int n, double j_nn, int cutoff_order = 1);
// Square plaquette 0-1-2-3 with diagonals J / 2^{3/2} as order 2.
CouplingGraph square_graph(double j_nn, int cutoff_order = 1);

// Per-qubit drive signs for a manifold; M2 needs a bipartite graph.
std::vector<int> manifold_signs(const CouplingGraph& g, ManifoldKind kind);

// Interaction-frame Hamiltonian 1/2 sum J_ij S_ij over all edges, using the
// realized couplings J (1 + eps). Edges between equally driven qubits carry
// the flip-flop term, edges between oppositely driven ones the double flip.
Mat manifold_hamiltonian(const CouplingGraph& g, ManifoldKind kind, bool include_errors = true);

// t + (2pi - mod(Omega t, 2pi)) / Omega; unchanged when Omega t is already a
// multiple of 2pi or Omega is 0.
double time_adjusted_duration(double t, double omega);

CompiledGate interaction_frame_schedule(ManifoldKind kind, double t, const CouplingGraph& g,
                                        double omega, FrameMethod method);

// Alternating M1/M2 blocks realizing exp(-i H_zz t). Requires Omega t / n > 2pi.
CompiledGate zz_synthesis_schedule(double t, int cycles, AdditionScheme scheme,
                                   const CouplingGraph& g, double omega,
                                   const SynthesisOptions& opts = {});

// Suzuki addition of the full M1 and M3 Hamiltonians (global drives only).
CompiledGate global_addition_schedule(double t, int cycles, const CouplingGraph& g, double omega);

// arccos(-theta / 4pi) and arccos(-theta / 8pi).
double two_qubit_compensation_phi(double theta);
double multiqubit_compensation_phi(double theta);

// Two-qubit manifold rotation M(theta) = exp(-i H_{I,k} theta / J).
CompiledGate manifold_gate(double theta, ManifoldKind kind, const CouplingGraph& g, double omega,
                           FrameMethod method = FrameMethod::TimeAdjust);
// M(theta) followed by M_phi(pi) M_3phi(2pi) M_phi(pi).
CompiledGate compensate_two_qubit(double theta, ManifoldKind kind, const CouplingGraph& g,
                                  double omega, FrameMethod method = FrameMethod::TimeAdjust);

struct MultiqubitOptions {
  ZZRealization realization = ZZRealization::Synthesized;
  int cycles = 2;
  SynthesisOptions synthesis;
  // Couplings beyond nearest neighbours have been removed by the caller's
  // schedule; required when the graph holds edges of order >= 2.
  bool odd_orders_eliminated = false;
};

// exp(-i theta/2 sum_NN sigma_z sigma_z) without compensation.
CompiledGate zz_gate(double theta, const CouplingGraph& g, double omega,
                     const MultiqubitOptions& opts = {});
// M(theta) followed by M_phi(2pi) M_-phi(4pi) M_phi(2pi), tilts on one colour class.
CompiledGate compensate_multiqubit(double theta, const CouplingGraph& g, double omega,
                                   const MultiqubitOptions& opts = {});
// The two-qubit sequence transplanted onto sigma_z sigma_z blocks. Works for
// two qubits; does not compensate longer chains.
CompiledGate compensate_multiqubit_advanced(double theta, const CouplingGraph& g, double omega,
                                            const MultiqubitOptions& opts = {});

// Plain zz(t) plus sign-flipped zz(t/2) blocks so that couplings between
// second neighbours cancel. Path graphs or cycles with a multiple of 4 sites.
CompiledGate nnn_elimination_schedule(const CouplingGraph& g, double t, double omega, int cycles,
                                      const SynthesisOptions& opts = {});

// zz evolution for t = pi / 2J plus local z corrections; the target is the
// product of controlled-Z gates over nearest-neighbour edges.
CompiledGate cluster_state_schedule(const CouplingGraph& g, double omega, int cycles,
                                    const SynthesisOptions& opts = {});
Vec cluster_state(const CouplingGraph& g);
// K_i = sigma_x^i prod_{j ~ i} sigma_z^j
std::vector<Mat> cluster_stabilizers(const CouplingGraph& g);

struct PipelineResult {
  Mat rho;
  double fidelity = 0.0;
  CompiledGate gate;
};

// Runs manifold_gate from |+-> (M1) or |++> (M2, M3) in the x basis and
// compares with the ideal gate applied to the same state.
PipelineResult two_qubit_gate_pipeline(double theta, ManifoldKind kind, const CouplingGraph& g,
                                       double omega, const NoiseSet& noise,
                                       const TrajectoryConfig& cfg,
                                       FrameMethod method = FrameMethod::TimeAdjust);

PipelineResult cluster_state_pipeline(const CouplingGraph& g, double omega, int cycles,
                                      const NoiseSet& noise, const TrajectoryConfig& cfg,
                                      const SynthesisOptions& opts = {});

// H = -1/2 sum_j [delta J sx sx + J (sy sy + sz sz)] over nearest neighbours.
Mat heisenberg_hamiltonian(const CouplingGraph& g, double delta);
CompiledGate heisenberg_schedule(const CouplingGraph& g, double delta, double theta, double omega,
                                 int cycles, const SynthesisOptions& opts = {});

struct HeisenbergResult {
  double hs_distance = 0.0;  // noiseless, phase gauged
  double fidelity = 1.0;     // noisy run from the Neel state, 1 when noise is empty
  CompiledGate gate;
};

HeisenbergResult heisenberg_pipeline(int n_qubits, double delta, double theta, double omega,
                                     int cycles, const NoiseSet& noise, const TrajectoryConfig& cfg,
                                     int cutoff_order = 1, double j_nn = kTwoPi * 26.0e3,
                                     const SynthesisOptions& opts = {});

// |tr(U^dag V) / d|^2, insensitive to a global phase.
double gate_fidelity(const Mat& u, const Mat& target);

}  // namespace nvsim

#endif  // NVSIM_GATES_HPP
