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

#ifndef NVSIM_NOISE_HPP
#define NVSIM_NOISE_HPP

#include <random>
#include <vector>

#include "nvsim/core.hpp"

namespace nvsim {

// Ornstein-Uhlenbeck dephasing field. All rates are angular (rad/s).
struct NoiseParams {
  double b_rms = 0.0;  // rad/s
  double tau = 0.0;    // s
  void validate() const;
  double diffusion() const { return 2.0 * b_rms * b_rms / tau; }
};

// Surface-bath values used throughout the gate examples.
namespace noise_defaults {
inline constexpr double kBRms = kTwoPi * 30.2e3;  // rad/s
inline constexpr double kTau = 2.5e-6;            // s
inline constexpr NoiseParams kParams{kBRms, kTau};
}  // namespace noise_defaults

// Field b(t) and its integral y(t) = int b dt (the accumulated phase).
struct OUState {
  double b = 0.0;
  double y = 0.0;
};

// Exact update over a fixed dt with the coefficients precomputed.
class OUStepper {
 public:
  OUStepper(const NoiseParams& p, double dt);
  double dt() const { return dt_; }
  OUState step(const OUState& s, double n1, double n2) const {
    if (dt_ == 0.0) return s;
    return OUState{s.b * mu_ + sd_b_ * n1, s.y + s.b * tau_m_ + sd_y_ * n2 + coupling_ * n1};
  }

 private:
  double dt_ = 0.0;
  double mu_ = 1.0, tau_m_ = 0.0, sd_b_ = 0.0, sd_y_ = 0.0, coupling_ = 0.0;
};

// Exact update over dt given two independent unit normals.
OUState ou_step(const OUState& s, const NoiseParams& p, double dt, double n1, double n2);

template <class Rng>
OUState ou_step(const OUState& s, const NoiseParams& p, double dt, Rng& rng) {
  std::normal_distribution<double> nd;
  const double n1 = nd(rng);
  const double n2 = nd(rng);
  return ou_step(s, p, dt, n1, n2);
}

template <class Rng>
OUState ou_stationary_sample(const NoiseParams& p, Rng& rng) {
  std::normal_distribution<double> nd;
  return OUState{p.b_rms * nd(rng), 0.0};
}

// S(w) = 2 b^2 tau / (1 + w^2 tau^2)
double lorentzian_spectrum(const NoiseParams& p, double omega);
// phi(s) = b^2 exp(-|s|/tau)
double ou_correlation(const NoiseParams& p, double s);

// Continuous-drive Rabi frequency Omega(t) applied to a single qubit.
// Either piecewise constant or Omega0 cos(w_osc t).
class DriveProfile {
 public:
  struct Piece {
    double duration;
    double omega;
  };

  static DriveProfile constant(double omega, double duration);
  static DriveProfile piecewise(std::vector<Piece> pieces);
  static DriveProfile oscillating(double amplitude, double omega_osc, double duration);

  double duration() const { return duration_; }
  bool is_oscillating() const { return oscillating_; }
  const std::vector<Piece>& pieces() const { return pieces_; }
  double amplitude() const { return amplitude_; }
  double omega_osc() const { return omega_osc_; }

  double omega(double t) const;
  // Phi(t) = int_0^t Omega
  double phase(double t) const;
  double max_abs_omega() const;
  // Times where Omega(t) is not smooth (piece boundaries), inside (0, duration).
  std::vector<double> breakpoints() const;

 private:
  std::vector<Piece> pieces_;
  std::vector<double> starts_;
  std::vector<double> phase_at_start_;
  double duration_ = 0.0;
  bool oscillating_ = false;
  double amplitude_ = 0.0;
  double omega_osc_ = 0.0;
};

struct FilterValue {
  double fx = 0.0;
  double fgamma = 0.0;
};

// F_x = |int e^{-iwt'} cos Phi|^2 + |int e^{-iwt'} sin Phi|^2 and F_gamma with
// a minus sign between the two terms, both over [0, t].
FilterValue filter_functions(const DriveProfile& drive, double t, double omega);

struct DecayRates {
  double rx = 0.0;
  double rgamma = 0.0;
};

// Time-domain double integral of the correlation function.
DecayRates decay_rates(const DriveProfile& drive, const NoiseParams& p, double t);
// Frequency route: (1/2t)(1/2pi) int S(w) F(w) dw.
DecayRates decay_rates_overlap(const DriveProfile& drive, const NoiseParams& p, double t);

// Normalized filter F_x / (2 pi t) and the matching F_gamma normalization
// N_gamma = 2 pi int_0^t (2 cos^2 Phi - 1).
double normalized_filter_x(const DriveProfile& drive, double t, double omega);
double filter_gamma_norm(const DriveProfile& drive, double t);

// FID: R_x t = b^2 tau^2 (t/tau - 1 + exp(-t/tau)).
double fid_decay_exponent(const NoiseParams& p, double t);

// P = 1/2 (1 + cos^2 phi e^{-R_x t} + sin^2 phi e^{-(R_x+R_gamma) t / 2}).
double survival_probability(const DecayRates& r, double t, double phi);

// T2(Omega) = (1 + Omega^2 tau^2) / (b^2 tau).
double effective_t2(const NoiseParams& p, double omega);

// Time at which the analytic FID envelope e^{-R_x t} reaches 1/e.
double fid_one_over_e_time(const NoiseParams& p);

}  // namespace nvsim

#endif  // NVSIM_NOISE_HPP
