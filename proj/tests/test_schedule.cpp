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

#include <gtest/gtest.h>

#include <json.hpp>

#include "nvsim/schedule.hpp"

namespace nvsim {
namespace {

PulseSchedule sample() {
  PulseSchedule s(3);
  s.add_pulse({{0, 2}, 'x', kPi});
  s.add_segment(1.5e-6, {kTwoPi * 1.2e6, -kTwoPi * 1.2e6, kTwoPi * 1.2e6});
  s.add_pulse({{1}, 'z', -0.3});
  s.add_pulse({{2}, 'y', kPi / 2});
  s.add_segment(0.25e-6, {0.0, 0.0, kTwoPi * 0.5e6});
  s.add_pulse({{0}, 'x', 1.0});
  return s;
}

TEST(Schedule, TotalTimeIsSumOfDurations) {
  const auto s = sample();
  EXPECT_DOUBLE_EQ(s.total_time(), 1.75e-6);
  EXPECT_DOUBLE_EQ(s.max_abs_omega(), kTwoPi * 1.2e6);
  EXPECT_NO_THROW(s.validate());
}

TEST(Schedule, PulsesMergeIntoFollowingSegment) {
  const auto s = sample();
  // Leading pulse rides on the first segment, the two middle pulses on the
  // second, the trailing pulse sits in its own step.
  ASSERT_EQ(s.steps().size(), 3u);
  EXPECT_EQ(s.steps()[0].pulses.size(), 1u);
  EXPECT_EQ(s.steps()[1].pulses.size(), 2u);
  EXPECT_EQ(s.steps()[2].duration, 0.0);
  EXPECT_EQ(s.steps()[1].drives[0].sign, 1);
  EXPECT_EQ(s.steps()[0].drives[1].sign, -1);
}

TEST(Schedule, ZeroAnglePulsesAndZeroSegmentsAreDropped) {
  PulseSchedule s(2);
  s.add_pulse({{0}, 'x', 0.0});
  s.add_segment(0.0, {1.0, 1.0});
  EXPECT_TRUE(s.empty());
}

TEST(Schedule, AppendKeepsOrderAndTime) {
  const auto a = sample();
  PulseSchedule b(3);
  b.add_segment(1e-6, {1.0, 2.0, 3.0});
  PulseSchedule c = a;
  c.append(b);
  EXPECT_DOUBLE_EQ(c.total_time(), a.total_time() + 1e-6);
  // The trailing pulse of `a` joins the first segment of `b`.
  EXPECT_EQ(c.steps().size(), 3u);
  EXPECT_EQ(c.steps().back().pulses.size(), 1u);
  EXPECT_THROW(c.append(PulseSchedule(2)), InvalidArgument);
}

TEST(Schedule, ValidationNamesTheProblem) {
  PulseSchedule s(2);
  EXPECT_THROW(s.add_segment(1.0, {1.0}), InvalidArgument);
  EXPECT_THROW(s.add_segment(-1.0, {1.0, 1.0}), InvalidArgument);
  s.add_step(Step{1.0, {Drive{1.0, 1}}, {}});
  try {
    s.validate();
    FAIL() << "expected a validation error";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("one drive per qubit"), std::string::npos);
  }
  PulseSchedule p(2);
  p.add_pulse({{0, 0}, 'x', 1.0});
  EXPECT_THROW(p.validate(), InvalidArgument);
  PulseSchedule q(2);
  q.add_pulse({{5}, 'x', 1.0});
  EXPECT_THROW(q.validate(), InvalidArgument);
  PulseSchedule r(2);
  r.add_pulse({{0}, 'w', 1.0});
  EXPECT_THROW(r.validate(), InvalidArgument);
  EXPECT_THROW(PulseSchedule(0), InvalidArgument);
}

TEST(PulseUnitary, PiAboutXIsMinusISigmaX) {
  const Mat u = pulse_unitary({{0}, 'x', kPi}, 1);
  EXPECT_LT((u - cplx(0, -1) * pauli('x')).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(PulseUnitary, ActsOnEachListedQubit) {
  const Pulse p{{0, 2}, 'y', 0.7};
  const Mat local = pulse_unitary({{0}, 'y', 0.7}, 1);
  const Mat expect = kron(kron(local, identity(2)), local);
  EXPECT_LT((pulse_unitary(p, 3) - expect).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_TRUE(is_unitary(pulse_unitary(p, 3), 1e-12));
}

TEST(PulseUnitary, MatchesMatrixExponential) {
  for (char axis : {'x', 'y', 'z'}) {
    const Mat expect = matrix_exponential(0.5 * pauli(axis), 1.3);
    EXPECT_LT((pulse_unitary({{0}, axis, 1.3}, 1) - expect).cwiseAbs().maxCoeff(), 1e-12) << axis;
  }
}

TEST(ScheduleJson, RoundTripIsExact) {
  const auto s = sample();
  const auto text = schedule_to_json(s);
  const auto back = schedule_from_json(text);
  ASSERT_EQ(back.steps().size(), s.steps().size());
  for (std::size_t k = 0; k < s.steps().size(); ++k) {
    const Step& a = s.steps()[k];
    const Step& b = back.steps()[k];
    EXPECT_EQ(a.duration, b.duration);
    ASSERT_EQ(a.drives.size(), b.drives.size());
    for (std::size_t q = 0; q < a.drives.size(); ++q) {
      EXPECT_EQ(a.drives[q].amp_rad_s, b.drives[q].amp_rad_s);
      EXPECT_EQ(a.drives[q].sign, b.drives[q].sign);
    }
    ASSERT_EQ(a.pulses.size(), b.pulses.size());
    for (std::size_t q = 0; q < a.pulses.size(); ++q) {
      EXPECT_EQ(a.pulses[q].qubits, b.pulses[q].qubits);
      EXPECT_EQ(a.pulses[q].axis, b.pulses[q].axis);
      EXPECT_EQ(a.pulses[q].angle, b.pulses[q].angle);
    }
  }
  EXPECT_EQ(schedule_to_json(back), text);
}

TEST(ScheduleJson, StableFieldNames) {
  const auto j = nlohmann::json::parse(schedule_to_json(sample()));
  const auto& seg = j.at("segments").at(0);
  EXPECT_TRUE(seg.contains("dur_s"));
  EXPECT_TRUE(seg.at("drives").at(0).contains("amp_rad_s"));
  EXPECT_TRUE(seg.at("drives").at(0).contains("sign"));
  EXPECT_TRUE(seg.at("pulses").at(0).contains("qubits"));
  EXPECT_TRUE(seg.at("pulses").at(0).contains("axis"));
  EXPECT_TRUE(seg.at("pulses").at(0).contains("angle"));
}

TEST(ScheduleJson, RejectsMalformedInput) {
  EXPECT_THROW(schedule_from_json("{"), InvalidArgument);
  EXPECT_THROW(schedule_from_json(R"({"n_qubits": 1})"), InvalidArgument);
  EXPECT_THROW(schedule_from_json(
                   R"({"n_qubits": 1, "segments": [{"dur_s": 1, "drives": [{"amp_rad_s": 1, "sign": 2}], "pulses": []}]})"),
               InvalidArgument);
}

}  // namespace
}  // namespace nvsim
