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

#include "nvsim/noise.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <string>
#include <type_traits>

namespace nvsim {

namespace {

constexpr int kGaussOrder = 20;
using Gauss = boost::math::quadrature::gauss<double, kGaussOrder>;

// Fixed-order Gauss-Legendre over [a, b].
template <class F>
auto gauss_panel(F&& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  const auto& x = Gauss::abscissa();
  const auto& w = Gauss::weights();
  static_assert(kGaussOrder % 2 == 0, "even order has no node at the midpoint");
  using R = std::decay_t<decltype(f(mid))>;
  R acc = w[0] * (f(mid - half * x[0]) + f(mid + half * x[0]));
  for (std::size_t k = 1; k < x.size(); ++k) {
    acc += w[k] * (f(mid - half * x[k]) + f(mid + half * x[k]));
  }
  return R(acc * half);
}

// Panel edges covering [a, b]: every breakpoint plus uniform splitting so that
// no panel is wider than h.
std::vector<double> panel_edges(double a, double b, const std::vector<double>& breaks, double h) {
  std::vector<double> pts{a};
  for (double x : breaks) {
    if (x > a && x < b) pts.push_back(x);
  }
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  std::vector<double> edges{a};
  for (std::size_t k = 1; k < pts.size(); ++k) {
    const double lo = pts[k - 1];
    const double hi = pts[k];
    if (hi <= lo) continue;
    const int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / h)));
    for (int j = 1; j <= n; ++j) edges.push_back(lo + (hi - lo) * j / n);
  }
  return edges;
}

// (e^{ikd} - 1)/(ik), continuous at k = 0.
cplx segment_integral(double k, double d) {
  const double half = 0.5 * k * d;
  const double sinc = std::abs(half) < 1e-8 ? 1.0 - half * half / 6.0 : std::sin(half) / half;
  return d * std::exp(cplx(0, half)) * sinc;
}

// I_s(w) = int_0^t e^{-i w t'} e^{i s Phi(t')} dt' for s = +1, -1.
cplx phase_transform(const DriveProfile& drive, double t, double omega, int s) {
  if (drive.is_oscillating()) {
    const double a = drive.amplitude() / drive.omega_osc();
    const double wo = drive.omega_osc();
    const int kmax = static_cast<int>(std::ceil(std::abs(a) + 10.0 * std::cbrt(std::abs(a)) + 25.0));
    cplx acc = 0.0;
    // e^{i a sin x} = sum_k J_k(a) e^{i k x}
    for (int k = -kmax; k <= kmax; ++k) {
      const double jk = boost::math::cyl_bessel_j(k, a);
      if (jk == 0.0) continue;
      acc += jk * segment_integral(s * k * wo - omega, t);
    }
    return acc;
  }
  cplx acc = 0.0;
  double start = 0.0;
  double phi0 = 0.0;
  for (const auto& piece : drive.pieces()) {
    if (start >= t) break;
    const double d = std::min(piece.duration, t - start);
    acc += std::exp(cplx(0, -omega * start + s * phi0)) * segment_integral(s * piece.omega - omega, d);
    phi0 += piece.omega * piece.duration;
    start += piece.duration;
  }
  return acc;
}

void check_time(const DriveProfile& drive, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("evaluation time must be positive");
  if (t > drive.duration() * (1.0 + 1e-12)) {
    throw InvalidArgument("evaluation time " + std::to_string(t) + " s exceeds drive duration " +
                          std::to_string(drive.duration()) + " s");
  }
}

// Largest rate at which Phi or Omega varies; sets the panel width.
double drive_rate(const DriveProfile& drive) {
  double r = drive.max_abs_omega();
  if (drive.is_oscillating()) r = std::max(r, drive.omega_osc());
  return r;
}

}  // namespace

void NoiseParams::validate() const {
  if (!(b_rms > 0.0) || !std::isfinite(b_rms)) {
    throw InvalidArgument("noise amplitude b_rms must be positive, got " + std::to_string(b_rms));
  }
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw InvalidArgument("noise correlation time tau must be positive, got " + std::to_string(tau));
  }
}

OUStepper::OUStepper(const NoiseParams& p, double dt) : dt_(dt) {
  p.validate();
  if (dt < 0.0 || !std::isfinite(dt)) throw InvalidArgument("OU step dt must be non-negative");
  if (dt == 0.0) return;
  const double x = dt / p.tau;
  const double m = -std::expm1(-x);  // 1 - mu
  const double c = p.diffusion();
  const double t3 = c * p.tau * p.tau * p.tau;
  const double var_b = p.b_rms * p.b_rms * m * (2.0 - m);
  // Variance of y conditioned on the new b.
  double f;
  if (x < 1e-2) {
    const double x2 = x * x;
    f = x * x2 * (1.0 / 12.0 - x2 / 120.0 + 17.0 * x2 * x2 / 20160.0);
  } else {
    f = x - m - 0.5 * m * m - m * m * m / (2.0 * (2.0 - m));
  }
  mu_ = 1.0 - m;
  tau_m_ = p.tau * m;
  sd_b_ = std::sqrt(var_b);
  sd_y_ = std::sqrt(std::max(0.0, t3 * f));
  const double kappa = 0.5 * c * p.tau * p.tau * m * m;
  coupling_ = sd_b_ > 0.0 ? kappa / sd_b_ : 0.0;
}

OUState ou_step(const OUState& s, const NoiseParams& p, double dt, double n1, double n2) {
  return OUStepper(p, dt).step(s, n1, n2);
}

double lorentzian_spectrum(const NoiseParams& p, double omega) {
  p.validate();
  const double wt = omega * p.tau;
  return 2.0 * p.b_rms * p.b_rms * p.tau / (1.0 + wt * wt);
}

double ou_correlation(const NoiseParams& p, double s) {
  return p.b_rms * p.b_rms * std::exp(-std::abs(s) / p.tau);
}

DriveProfile DriveProfile::constant(double omega, double duration) {
  return piecewise({Piece{duration, omega}});
}

DriveProfile DriveProfile::piecewise(std::vector<Piece> pieces) {
  if (pieces.empty()) throw InvalidArgument("drive profile needs at least one piece");
  DriveProfile d;
  double start = 0.0;
  double phi = 0.0;
  for (const auto& p : pieces) {
    if (!(p.duration > 0.0) || !std::isfinite(p.duration)) {
      throw InvalidArgument("drive piece duration must be positive");
    }
    if (!std::isfinite(p.omega)) throw InvalidArgument("drive amplitude must be finite");
    d.starts_.push_back(start);
    d.phase_at_start_.push_back(phi);
    start += p.duration;
    phi += p.omega * p.duration;
  }
  d.pieces_ = std::move(pieces);
  d.duration_ = start;
  return d;
}

DriveProfile DriveProfile::oscillating(double amplitude, double omega_osc, double duration) {
  if (!(omega_osc > 0.0)) throw InvalidArgument("oscillation frequency must be positive");
  if (!(duration > 0.0)) throw InvalidArgument("drive duration must be positive");
  if (!std::isfinite(amplitude)) throw InvalidArgument("drive amplitude must be finite");
  DriveProfile d;
  d.oscillating_ = true;
  d.amplitude_ = amplitude;
  d.omega_osc_ = omega_osc;
  d.duration_ = duration;
  return d;
}

double DriveProfile::omega(double t) const {
  if (oscillating_) return amplitude_ * std::cos(omega_osc_ * t);
  auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
  const std::size_t k = it == starts_.begin() ? 0 : static_cast<std::size_t>(it - starts_.begin()) - 1;
  return pieces_[k].omega;
}

double DriveProfile::phase(double t) const {
  if (oscillating_) return amplitude_ / omega_osc_ * std::sin(omega_osc_ * t);
  auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
  const std::size_t k = it == starts_.begin() ? 0 : static_cast<std::size_t>(it - starts_.begin()) - 1;
  return phase_at_start_[k] + pieces_[k].omega * (t - starts_[k]);
}

double DriveProfile::max_abs_omega() const {
  if (oscillating_) return std::abs(amplitude_);
  double m = 0.0;
  for (const auto& p : pieces_) m = std::max(m, std::abs(p.omega));
  return m;
}

std::vector<double> DriveProfile::breakpoints() const {
  std::vector<double> out;
  for (std::size_t k = 1; k < starts_.size(); ++k) out.push_back(starts_[k]);
  return out;
}

FilterValue filter_functions(const DriveProfile& drive, double t, double omega) {
  check_time(drive, t);
  const cplx ip = phase_transform(drive, t, omega, +1);
  const cplx im = phase_transform(drive, t, omega, -1);
  FilterValue f;
  f.fx = 0.5 * (std::norm(ip) + std::norm(im));
  f.fgamma = (ip * std::conj(im)).real();
  return f;
}

double normalized_filter_x(const DriveProfile& drive, double t, double omega) {
  return filter_functions(drive, t, omega).fx / (kTwoPi * t);
}

double filter_gamma_norm(const DriveProfile& drive, double t) {
  check_time(drive, t);
  // 2 cos^2 Phi - 1 = cos 2 Phi
  if (!drive.is_oscillating()) {
    double acc = 0.0;
    double start = 0.0;
    for (const auto& piece : drive.pieces()) {
      if (start >= t) break;
      const double d = std::min(piece.duration, t - start);
      const double phi0 = drive.phase(start);
      acc += (std::exp(cplx(0, 2.0 * phi0)) * segment_integral(2.0 * piece.omega, d)).real();
      start += piece.duration;
    }
    return kTwoPi * acc;
  }
  const double h = std::min(t, 0.5 / drive_rate(drive));
  double acc = 0.0;
  const auto edges = panel_edges(0.0, t, {}, h);
  for (std::size_t k = 1; k < edges.size(); ++k) {
    acc += gauss_panel([&](double x) { return std::cos(2.0 * drive.phase(x)); }, edges[k - 1], edges[k]);
  }
  return kTwoPi * acc;
}

DecayRates decay_rates(const DriveProfile& drive, const NoiseParams& p, double t) {
  p.validate();
  check_time(drive, t);
  const double rate = drive_rate(drive);
  double h = std::min(p.tau, t);
  if (rate > 0.0) h = std::min(h, 1.5 / rate);
  const std::vector<double> grid = panel_edges(0.0, t, drive.breakpoints(), h);
  const double cutoff = 40.0 * p.tau;

  // Inner integrals over t'' < t' for both rates at once.
  auto inner = [&](double tp) {
    const double phi_p = drive.phase(tp);
    auto g = [&](double tpp) {
      const double c = ou_correlation(p, tp - tpp);
      const double phi_pp = drive.phase(tpp);
      return Eigen::Vector2d(c * std::cos(phi_p - phi_pp), c * std::cos(phi_p + phi_pp));
    };
    Eigen::Vector2d acc = Eigen::Vector2d::Zero();
    const double lo_limit = std::max(0.0, tp - cutoff);
    double lo = lo_limit;
    for (double e : grid) {
      if (e <= lo) continue;
      const double hi = std::min(e, tp);
      if (hi > lo) acc += gauss_panel(g, lo, hi);
      lo = hi;
      if (e >= tp) break;
    }
    return acc;
  };

  Eigen::Vector2d total = Eigen::Vector2d::Zero();
  for (std::size_t k = 1; k < grid.size(); ++k) total += gauss_panel(inner, grid[k - 1], grid[k]);
  DecayRates r{total(0) / t, total(1) / t};
  if (!std::isfinite(r.rx) || !std::isfinite(r.rgamma)) throw NumericalError("decay rate is not finite");
  return r;
}

DecayRates decay_rates_overlap(const DriveProfile& drive, const NoiseParams& p, double t) {
  p.validate();
  check_time(drive, t);
  const double scale = std::max({drive_rate(drive), 1.0 / p.tau, 1.0 / t});
  const double w_max = 200.0 * scale;
  const double h = std::min(1.5 / t, 0.5 / p.tau);
  std::vector<double> breaks;
  const double om = drive.max_abs_omega();
  if (om > 0.0 && om < w_max && !drive.is_oscillating()) breaks.push_back(om);
  const auto edges = panel_edges(0.0, w_max, breaks, h);
  auto integrand = [&](double w) {
    const FilterValue f = filter_functions(drive, t, w);
    const double s = lorentzian_spectrum(p, w);
    return Eigen::Vector2d(s * f.fx, s * f.fgamma);
  };
  Eigen::Vector2d acc = Eigen::Vector2d::Zero();
  for (std::size_t k = 1; k < edges.size(); ++k) acc += gauss_panel(integrand, edges[k - 1], edges[k]);
  // Asymptotic tails beyond w_max, where S ~ 2b^2/(tau w^2) and the filters
  // average to 2/w^2 and (1 + cos 2 Phi(t))/w^2.
  const double b2 = p.b_rms * p.b_rms;
  const double w3 = w_max * w_max * w_max;
  acc(0) += 4.0 * b2 / (3.0 * p.tau * w3);
  acc(1) += 2.0 * b2 * (1.0 + std::cos(2.0 * drive.phase(t))) / (3.0 * p.tau * w3);
  // Even integrands: int_{-inf}^{inf} = 2 int_0^inf.
  const double norm = 1.0 / (kTwoPi * t);
  DecayRates r{acc(0) * norm, acc(1) * norm};
  if (!std::isfinite(r.rx) || !std::isfinite(r.rgamma)) throw NumericalError("decay rate is not finite");
  return r;
}

double fid_decay_exponent(const NoiseParams& p, double t) {
  p.validate();
  if (t < 0.0) throw InvalidArgument("time must be non-negative");
  const double x = t / p.tau;
  // x - 1 + e^{-x}, accurate for small x.
  const double g = x < 1e-3 ? x * x * (0.5 - x / 6.0 + x * x / 24.0) : x + std::expm1(-x);
  return p.b_rms * p.b_rms * p.tau * p.tau * g;
}

double survival_probability(const DecayRates& r, double t, double phi) {
  if (t < 0.0) throw InvalidArgument("time must be non-negative");
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  return 0.5 * (1.0 + c * c * std::exp(-r.rx * t) + s * s * std::exp(-0.5 * (r.rx + r.rgamma) * t));
}

double effective_t2(const NoiseParams& p, double omega) {
  p.validate();
  const double wt = omega * p.tau;
  return (1.0 + wt * wt) / (p.b_rms * p.b_rms * p.tau);
}

double fid_one_over_e_time(const NoiseParams& p) {
  p.validate();
  double lo = 0.0;
  double hi = p.tau;
  while (fid_decay_exponent(p, hi) < 1.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (fid_decay_exponent(p, mid) < 1.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace nvsim
