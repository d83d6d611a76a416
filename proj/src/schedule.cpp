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

#include "nvsim/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <set>

namespace nvsim {

PulseSchedule::PulseSchedule(int n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits < 1) throw InvalidArgument("schedule needs at least one qubit");
}

double PulseSchedule::total_time() const {
  double t = 0.0;
  for (const auto& s : steps_) t += s.duration;
  return t;
}

double PulseSchedule::max_abs_omega() const {
  double m = 0.0;
  for (const auto& s : steps_)
    for (const auto& d : s.drives) m = std::max(m, std::abs(d.amp_rad_s));
  return m;
}

void PulseSchedule::add_pulse(Pulse p) {
  if (p.qubits.empty() || p.angle == 0.0) return;
  if (steps_.empty() || steps_.back().duration > 0.0) steps_.push_back(Step{});
  steps_.back().pulses.push_back(std::move(p));
}

void PulseSchedule::add_pulses(const std::vector<Pulse>& ps) {
  for (const auto& p : ps) add_pulse(p);
}

void PulseSchedule::add_segment(double duration, const std::vector<double>& omegas) {
  if (static_cast<int>(omegas.size()) != n_qubits_) {
    throw InvalidArgument("segment needs one Rabi frequency per qubit");
  }
  if (!(duration >= 0.0) || !std::isfinite(duration)) {
    throw InvalidArgument("segment duration must be finite and non-negative");
  }
  if (duration == 0.0) return;
  std::vector<Drive> drives;
  drives.reserve(omegas.size());
  for (double w : omegas) drives.push_back(Drive{std::abs(w), w < 0.0 ? -1 : 1});
  // A pending pulse-only step absorbs the segment.
  if (!steps_.empty() && steps_.back().duration == 0.0) {
    steps_.back().duration = duration;
    steps_.back().drives = std::move(drives);
    return;
  }
  steps_.push_back(Step{duration, std::move(drives), {}});
}

void PulseSchedule::add_step(Step s) {
  if (s.duration == 0.0 && s.pulses.empty()) return;
  steps_.push_back(std::move(s));
}

void PulseSchedule::append(const PulseSchedule& other) {
  if (other.n_qubits_ != n_qubits_) throw InvalidArgument("cannot append schedules of different size");
  for (const auto& s : other.steps_) {
    if (s.duration == 0.0) {
      add_pulses(s.pulses);
    } else if (!steps_.empty() && steps_.back().duration == 0.0) {
      Step merged = s;
      merged.pulses.insert(merged.pulses.begin(), steps_.back().pulses.begin(),
                           steps_.back().pulses.end());
      steps_.back() = std::move(merged);
    } else {
      steps_.push_back(s);
    }
  }
}

void PulseSchedule::validate() const {
  if (n_qubits_ < 1) throw InvalidArgument("schedule needs at least one qubit");
  for (std::size_t k = 0; k < steps_.size(); ++k) {
    const Step& s = steps_[k];
    const std::string where = "schedule step " + std::to_string(k) + ": ";
    if (!(s.duration >= 0.0) || !std::isfinite(s.duration)) {
      throw InvalidArgument(where + "duration must be finite and non-negative");
    }
    if (s.duration == 0.0 && s.pulses.empty()) throw InvalidArgument(where + "empty step");
    if (s.duration > 0.0 && static_cast<int>(s.drives.size()) != n_qubits_) {
      throw InvalidArgument(where + "needs one drive per qubit");
    }
    if (s.duration == 0.0 && !s.drives.empty() && static_cast<int>(s.drives.size()) != n_qubits_) {
      throw InvalidArgument(where + "drive list has the wrong length");
    }
    for (const auto& d : s.drives) {
      if (!(d.amp_rad_s >= 0.0) || !std::isfinite(d.amp_rad_s)) {
        throw InvalidArgument(where + "drive amplitude must be finite and non-negative");
      }
      if (d.sign != 1 && d.sign != -1) throw InvalidArgument(where + "drive sign must be +1 or -1");
    }
    for (const auto& p : s.pulses) {
      if (p.axis != 'x' && p.axis != 'y' && p.axis != 'z') {
        throw InvalidArgument(where + "pulse axis must be x, y or z");
      }
      if (!std::isfinite(p.angle)) throw InvalidArgument(where + "pulse angle must be finite");
      if (p.qubits.empty()) throw InvalidArgument(where + "pulse acts on no qubit");
      std::set<int> seen;
      for (int q : p.qubits) {
        if (q < 0 || q >= n_qubits_) throw InvalidArgument(where + "pulse qubit out of range");
        if (!seen.insert(q).second) throw InvalidArgument(where + "pulse lists a qubit twice");
      }
    }
  }
}

Mat pulse_unitary(const Pulse& p, int n_qubits) {
  const Mat sigma = pauli(p.axis);
  const Mat local = std::cos(p.angle / 2.0) * identity(2) - cplx(0.0, std::sin(p.angle / 2.0)) * sigma;
  Mat u = identity(dim_of(n_qubits));
  for (int q : p.qubits) {
    const int site[1] = {q};
    u = embed_local(local, site, n_qubits) * u;
  }
  return u;
}

std::string schedule_to_json(const PulseSchedule& s) {
  using nlohmann::ordered_json;
  ordered_json root;
  root["n_qubits"] = s.n_qubits();
  ordered_json segs = ordered_json::array();
  for (const auto& st : s.steps()) {
    ordered_json seg;
    seg["dur_s"] = st.duration;
    ordered_json drives = ordered_json::array();
    for (const auto& d : st.drives) drives.push_back({{"amp_rad_s", d.amp_rad_s}, {"sign", d.sign}});
    seg["drives"] = drives;
    ordered_json pulses = ordered_json::array();
    for (const auto& p : st.pulses) {
      pulses.push_back({{"qubits", p.qubits}, {"axis", std::string(1, p.axis)}, {"angle", p.angle}});
    }
    seg["pulses"] = pulses;
    segs.push_back(seg);
  }
  root["segments"] = segs;
  return root.dump(2);
}

PulseSchedule schedule_from_json(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
    PulseSchedule out(root.at("n_qubits").get<int>());
    for (const auto& seg : root.at("segments")) {
      Step st;
      st.duration = seg.at("dur_s").get<double>();
      for (const auto& d : seg.at("drives")) {
        st.drives.push_back(Drive{d.at("amp_rad_s").get<double>(), d.at("sign").get<int>()});
      }
      for (const auto& p : seg.at("pulses")) {
        const std::string axis = p.at("axis").get<std::string>();
        if (axis.size() != 1) throw InvalidArgument("pulse axis must be a single letter");
        st.pulses.push_back(Pulse{p.at("qubits").get<std::vector<int>>(), axis[0], p.at("angle").get<double>()});
      }
      out.add_step(std::move(st));
    }
    out.validate();
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("schedule JSON: ") + e.what());
  }
}

}  // namespace nvsim
