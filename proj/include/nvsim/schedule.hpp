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

#ifndef NVSIM_SCHEDULE_HPP
#define NVSIM_SCHEDULE_HPP

#include <string>
#include <vector>

#include "nvsim/core.hpp"

namespace nvsim {

// Instantaneous rotation exp(-i angle/2 sigma_axis) on each listed qubit.
struct Pulse {
  std::vector<int> qubits;
  char axis = 'x';
  double angle = 0.0;
};

// Continuous drive on one qubit; the Rabi frequency is sign * amp_rad_s.
struct Drive {
  double amp_rad_s = 0.0;
  int sign = 1;
  double omega() const { return sign * amp_rad_s; }
};

// One schedule step: the pulses act first, then the drives are held for
// `duration`. A step with duration 0 carries pulses only.
struct Step {
  double duration = 0.0;
  std::vector<Drive> drives;  // one per qubit, may be empty when duration is 0
  std::vector<Pulse> pulses;
};

class PulseSchedule {
 public:
  PulseSchedule() = default;
  explicit PulseSchedule(int n_qubits);

  int n_qubits() const { return n_qubits_; }
  const std::vector<Step>& steps() const { return steps_; }
  double total_time() const;
  bool empty() const { return steps_.empty(); }
  double max_abs_omega() const;

  // Appends a pulse; merged into a trailing pulse-only step when possible.
  void add_pulse(Pulse p);
  void add_pulses(const std::vector<Pulse>& ps);
  // Drive segment with one Rabi frequency per qubit (sign taken from the value).
  void add_segment(double duration, const std::vector<double>& omegas);
  void add_step(Step s);
  void append(const PulseSchedule& other);

  void validate() const;

 private:
  int n_qubits_ = 0;
  std::vector<Step> steps_;
};

Mat pulse_unitary(const Pulse& p, int n_qubits);

std::string schedule_to_json(const PulseSchedule& s);
PulseSchedule schedule_from_json(const std::string& text);

}  // namespace nvsim

#endif  // NVSIM_SCHEDULE_HPP
