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

#ifndef NVSIM_DYNAMICS_HPP
#define NVSIM_DYNAMICS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nvsim/core.hpp"
#include "nvsim/noise.hpp"
#include "nvsim/nv_hamiltonian.hpp"
#include "nvsim/schedule.hpp"

namespace nvsim {

// Full keeps the complete J/2 sigma_z sigma_z coupling. Secular keeps only the
// parts that are resonant in the frame of the drive: flip-flop terms between
// equally driven qubits and double flips between oppositely driven ones.
enum class CouplingModel { Full, Secular };

// Per-qubit dephasing; nullopt means the qubit is noiseless.
using NoiseSet = std::vector<std::optional<NoiseParams>>;

inline constexpr int kDefaultTrajectories = 500;

struct TrajectoryConfig {
  double dt = 0.0;  // s; 0 selects the largest stable step
  int n_trajectories = kDefaultTrajectories;
  std::uint64_t base_seed = 0;
  CouplingModel model = CouplingModel::Full;
};

struct DtBound {
  double value = 0.0;
  std::string name;
};

// min(0.05 2pi/Omega_max, tau/20, 0.05 2pi/J_max) over the terms present.
DtBound max_stable_dt(const PulseSchedule& s, const CouplingGraph& g, const NoiseSet& noise);
// Throws InvalidArgument naming the violated bound.
void validate_dt(double dt, const PulseSchedule& s, const CouplingGraph& g, const NoiseSet& noise);

// Drive plus coupling for one segment, omegas in rad/s.
Mat segment_hamiltonian(const std::vector<double>& omegas, const CouplingGraph& g,
                        CouplingModel model = CouplingModel::Full);
// sum_edges J (1 + eps) / 2 sigma_z sigma_z
Mat zz_hamiltonian(const CouplingGraph& g, bool include_errors = true);

// Noiseless propagator of the whole schedule.
Mat schedule_propagator(const PulseSchedule& s, const CouplingGraph& g,
                        CouplingModel model = CouplingModel::Full);

// States at each record time (ascending, within [0, total_time]). Pulses
// scheduled at a record time are applied before the state is recorded.
std::vector<Vec> evolve_trajectory(const PulseSchedule& s, const CouplingGraph& g,
                                   const NoiseSet& noise, const Vec& psi0,
                                   const TrajectoryConfig& cfg, std::uint64_t traj_index,
                                   const std::vector<double>& record_times);

struct EnsembleResult {
  std::vector<double> times;
  std::vector<Mat> rho;                        // empty unless requested
  std::vector<std::vector<double>> mean;       // [observable][time]
  std::vector<std::vector<double>> stderr_;    // [observable][time]
  int n_trajectories = 0;
};

// Average over trajectories; bitwise reproducible for a fixed base_seed and
// independent of the worker count.
EnsembleResult ensemble_density(const PulseSchedule& s, const CouplingGraph& g,
                                const NoiseSet& noise, const Vec& psi0,
                                const TrajectoryConfig& cfg,
                                const std::vector<double>& record_times,
                                const std::vector<Mat>& observables = {}, bool keep_rho = true);

enum class DecayMethod { OneOverE, ExponentialFit };

// Decay time of an envelope that starts at 1. The fit uses samples above
// fit_floor and a line through the origin in log space.
double extract_decay_time(const std::vector<double>& t, const std::vector<double>& envelope,
                          DecayMethod method, double fit_floor = 0.1);

// Graph with no edges, for single-qubit or uncoupled runs.
CouplingGraph uncoupled_graph(int n_qubits);

}  // namespace nvsim

#endif  // NVSIM_DYNAMICS_HPP
