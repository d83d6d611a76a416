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

#include "nvsim/bath.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

#include "nvsim/parallel.hpp"

namespace nvsim {

double coupling_constant(CouplingPair pair) {
  switch (pair) {
    case CouplingPair::ElectronElectron: return kTwoPi * 52.0e6;
    case CouplingPair::ElectronFluorine: return kTwoPi * 74.4e3;
    case CouplingPair::FluorineFluorine: return kTwoPi * 106.3;
  }
  throw InvalidArgument("unknown coupling pair");
}

BathSpecies parse_species(const std::string& name) {
  if (name == "fluorine") return BathSpecies::Fluorine;
  if (name == "electron") return BathSpecies::Electron;
  throw InvalidArgument("unknown bath species '" + name + "' (valid: fluorine, electron)");
}

BathConstants BathConstants::for_species(BathSpecies s) {
  if (s == BathSpecies::Fluorine) {
    return {coupling_constant(CouplingPair::ElectronFluorine),
            coupling_constant(CouplingPair::FluorineFluorine)};
  }
  // The NV electron couples to electron bath spins like any electron pair.
  return {coupling_constant(CouplingPair::ElectronElectron),
          coupling_constant(CouplingPair::ElectronElectron)};
}

int surface_spin_count(double radius_nm, double spacing_nm) {
  if (!(radius_nm > 0.0)) throw InvalidArgument("sphere radius must be positive");
  if (!(spacing_nm > 0.0)) throw InvalidArgument("spin spacing must be positive");
  return static_cast<int>(std::floor(4.0 * kPi * radius_nm * radius_nm / (spacing_nm * spacing_nm)));
}

void BathGeometry::validate() const {
  if (!(radius_nm > 0.0) || !std::isfinite(radius_nm)) {
    throw InvalidArgument("sphere radius must be positive");
  }
  if (n_spins == 0 && (!(spacing_nm > 0.0) || !std::isfinite(spacing_nm))) {
    throw InvalidArgument("spin spacing must be positive");
  }
  if (n_spins < 0) throw InvalidArgument("spin count must be non-negative");
  if (jitter < 0.0 || jitter > 0.5) throw InvalidArgument("jitter must lie in [0, 0.5]");
  if (rejection < 0.0 || rejection >= 1.0) throw InvalidArgument("rejection must lie in [0, 1)");
  if (resolved_count() < 2) throw InvalidArgument("geometry yields fewer than 2 spins");
}

int BathGeometry::resolved_count() const {
  return n_spins > 0 ? n_spins : surface_spin_count(radius_nm, spacing_nm);
}

double BathGeometry::resolved_spacing() const {
  if (n_spins > 0) return std::sqrt(4.0 * kPi * radius_nm * radius_nm / n_spins);
  return spacing_nm;
}

namespace {

// Short-range repulsion that evens out the Fibonacci lattice, whose
// nearest-neighbour distances scatter well below the cell size.
void relax_on_sphere(std::vector<Eigen::Vector3d>& pts, double r, double s) {
  const int n = static_cast<int>(pts.size());
  if (n < 4) return;
  // Short-range r^-4 repulsion, projected onto the tangent plane, pushes the
  // Fibonacci points towards a hexagonal packing at the target spacing.
  const double a = s * std::sqrt(2.0 / std::sqrt(3.0));
  const double reach = 1.8 * a;
  const int ncell = static_cast<int>(std::ceil(2.0 * r / reach)) + 1;
  auto cell_of = [&](const Eigen::Vector3d& p) {
    return Eigen::Vector3i(static_cast<int>(std::floor((p.x() + r) / reach)),
                           static_cast<int>(std::floor((p.y() + r) / reach)),
                           static_cast<int>(std::floor((p.z() + r) / reach)));
  };
  auto key = [&](const Eigen::Vector3i& c) {
    return (static_cast<long long>(c.x()) * ncell + c.y()) * ncell + c.z();
  };
  std::vector<Eigen::Vector3d> shift(n);
  for (int iter = 0; iter < 300; ++iter) {
    std::unordered_map<long long, std::vector<int>> cells;
    for (int i = 0; i < n; ++i) cells[key(cell_of(pts[i]))].push_back(i);
    for (int i = 0; i < n; ++i) {
      Eigen::Vector3d f = Eigen::Vector3d::Zero();
      const Eigen::Vector3i c = cell_of(pts[i]);
      for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dz = -1; dz <= 1; ++dz) {
            auto it = cells.find(key(c + Eigen::Vector3i(dx, dy, dz)));
            if (it == cells.end()) continue;
            for (int j : it->second) {
              if (j == i) continue;
              const Eigen::Vector3d d = pts[i] - pts[j];
              const double dist = d.norm();
              if (dist < reach && dist > 0.0) f += d / dist * std::pow(a / dist, 4);
            }
          }
      const Eigen::Vector3d normal = pts[i] / r;
      f -= normal * normal.dot(f);
      const double mag = f.norm();
      shift[i] = mag > 0.0 ? Eigen::Vector3d(f * (std::min(0.1 * a, 0.06 * a * mag) / mag))
                           : Eigen::Vector3d::Zero();
    }
    for (int i = 0; i < n; ++i) {
      pts[i] += shift[i];
      pts[i] *= r / pts[i].norm();
    }
  }
}

}  // namespace

std::vector<Eigen::Vector3d> place_surface_spins(const BathGeometry& g, std::uint64_t seed) {
  g.validate();
  const int n = g.resolved_count();
  const double s = g.resolved_spacing();
  const double r = g.radius_nm;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double golden = kPi * (1.0 + std::sqrt(5.0));
  const double min_d2 = (g.rejection * s) * (g.rejection * s);

  // Uniform grid of cells for the rejection test.
  const double cell = std::max(g.rejection * s, 1e-9);
  const int ncell = std::max(1, static_cast<int>(std::ceil(2.0 * r / cell)) + 1);
  std::unordered_map<long long, std::vector<int>> cells;
  auto key = [&](int cx, int cy, int cz) {
    return (static_cast<long long>(cx) * ncell + cy) * ncell + cz;
  };
  auto cell_of = [&](const Eigen::Vector3d& p) {
    return Eigen::Vector3i(static_cast<int>(std::floor((p.x() + r) / cell)),
                           static_cast<int>(std::floor((p.y() + r) / cell)),
                           static_cast<int>(std::floor((p.z() + r) / cell)));
  };

  std::vector<Eigen::Vector3d> out;
  out.reserve(n);
  auto too_close = [&](const Eigen::Vector3d& q) {
    const Eigen::Vector3i c = cell_of(q);
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          auto it = cells.find(key(c.x() + dx, c.y() + dy, c.z() + dz));
          if (it == cells.end()) continue;
          for (int idx : it->second) {
            if ((out[idx] - q).squaredNorm() < min_d2) return true;
          }
        }
    return false;
  };

  std::vector<Eigen::Vector3d> lattice(n);
  for (int i = 0; i < n; ++i) {
    const double u = (i + 0.5) / n;
    const double z = 1.0 - 2.0 * u;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * (i + 0.5);
    lattice[i] = r * Eigen::Vector3d(rho * std::cos(phi), rho * std::sin(phi), z);
  }
  relax_on_sphere(lattice, r, s);

  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d& base = lattice[i];
    const Eigen::Vector3d normal = base / r;
    Eigen::Vector3d t1 = normal.cross(Eigen::Vector3d::UnitZ());
    if (t1.norm() < 1e-6) t1 = normal.cross(Eigen::Vector3d::UnitX());
    t1.normalize();
    const Eigen::Vector3d t2 = normal.cross(t1);
    Eigen::Vector3d chosen = base;
    if (g.jitter > 0.0) {
      for (int attempt = 0; attempt < 20; ++attempt) {
        const double rr = g.jitter * s * std::sqrt(uni(rng));
        const double a = kTwoPi * uni(rng);
        Eigen::Vector3d q = base + rr * (std::cos(a) * t1 + std::sin(a) * t2);
        q *= r / q.norm();
        if (!too_close(q)) {
          chosen = q;
          break;
        }
      }
    }
    const Eigen::Vector3i c = cell_of(chosen);
    cells[key(c.x(), c.y(), c.z())].push_back(static_cast<int>(out.size()));
    out.push_back(chosen);
  }
  return out;
}

BathSpectrum::BathSpectrum(std::vector<SpectralPeak> peaks, double total_weight, std::size_t n_pairs)
    : peaks_(std::move(peaks)), total_weight_(total_weight), n_pairs_(n_pairs) {}

double BathSpectrum::operator()(double omega) const {
  static const double inv_sqrt_2pi = 1.0 / std::sqrt(kTwoPi);
  double acc = 0.0;
  for (const auto& p : peaks_) {
    const double a = (omega - p.center) / p.width;
    const double b = (omega + p.center) / p.width;
    double g = 0.0;
    if (std::abs(a) < 40.0) g += std::exp(-0.5 * a * a);
    if (std::abs(b) < 40.0) g += std::exp(-0.5 * b * b);
    if (g > 0.0) acc += p.weight * inv_sqrt_2pi / p.width * g;
  }
  return kTwoPi * acc;
}

std::vector<double> BathSpectrum::evaluate(const std::vector<double>& omega) const {
  std::vector<double> out(omega.size());
  parallel_for(omega.size(), [&](std::size_t k) { out[k] = (*this)(omega[k]); });
  return out;
}

BathSpectrum pair_field_spectrum(const std::vector<Eigen::Vector3d>& spins_nm,
                                 const BathConstants& constants, const Eigen::Vector3d& field_dir,
                                 double merge_tol) {
  const std::size_t n = spins_nm.size();
  if (n < 3) throw InvalidArgument("pair spectrum needs at least 3 bath spins");
  if (!(field_dir.norm() > 0.0)) throw InvalidArgument("field direction must be non-zero");
  if (merge_tol < 0.0) throw InvalidArgument("merge tolerance must be non-negative");
  const Eigen::Vector3d zhat = field_dir.normalized();

  // Coupling of each bath spin to the NV at the origin.
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = spins_nm[i].norm();
    if (!(r > 0.0)) throw InvalidArgument("bath spin at the NV position");
    const double c = spins_nm[i].dot(zhat) / r;
    a[i] = 2.0 * constants.nv_bath / (r * r * r) * (1.0 - 3.0 * c * c);
  }
  auto flip_flop = [&](std::size_t i, std::size_t j) {
    const Eigen::Vector3d d = spins_nm[j] - spins_nm[i];
    const double r2 = d.squaredNorm();
    if (!(r2 > 0.0)) throw InvalidArgument("two bath spins share a position");
    const double r = std::sqrt(r2);
    const double c = d.dot(zhat) / r;
    return constants.bath_bath / (r2 * r) * (3.0 * c * c - 1.0);
  };

  // Sum_k b_ik^2 for each spin.
  std::vector<double> b2sum(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      const double b = flip_flop(i, k);
      acc += b * b;
    }
    b2sum[i] = acc;
  });

  struct Acc {
    double w = 0.0, we = 0.0, ws2 = 0.0;
  };
  const double log_step = merge_tol > 0.0 ? std::log1p(merge_tol) : 0.0;
  std::unordered_map<std::uint64_t, Acc> merged;
  std::vector<SpectralPeak> raw;
  double total = 0.0;
  std::size_t n_pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      ++n_pairs;
      const double b = flip_flop(i, j);
      const double delta = 0.25 * (a[i] - a[j]);
      const double b2 = b * b;
      const double d2 = delta * delta;
      if (b2 == 0.0 || d2 == 0.0) continue;
      const double w = b2 * d2 / (b2 + d2);
      const double moment = (b2sum[i] - b2) * a[i] * a[i] + (b2sum[j] - b2) * a[j] * a[j];
      // (b^2 + D^2)/(4 D^2 b^2) = 1/(4 w)
      const double s2 = moment / (4.0 * w);
      if (!(s2 > 0.0)) continue;
      const double e = 2.0 * std::sqrt(b2 + d2);
      total += w;
      if (log_step == 0.0) {
        raw.push_back({w, e, std::sqrt(s2)});
        continue;
      }
      const auto ks = static_cast<std::int64_t>(std::floor(0.5 * std::log(s2) / log_step));
      const auto ke = static_cast<std::int64_t>(std::floor(std::log(e) / log_step));
      const std::uint64_t k = (static_cast<std::uint64_t>(ks + (1 << 20)) << 32) ^
                              static_cast<std::uint64_t>(ke + (1 << 20));
      Acc& acc = merged[k];
      acc.w += w;
      acc.we += w * e;
      acc.ws2 += w * s2;
    }
  }
  if (total == 0.0) throw NumericalError("bath spectrum is empty");
  if (log_step > 0.0) {
    std::vector<std::pair<std::uint64_t, Acc>> items(merged.begin(), merged.end());
    std::sort(items.begin(), items.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    for (const auto& [k, acc] : items) raw.push_back({acc.w, acc.we / acc.w, std::sqrt(acc.ws2 / acc.w)});
  }
  return BathSpectrum(std::move(raw), total, n_pairs);
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw InvalidArgument("invalid log grid");
  std::vector<double> g(n);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int k = 0; k < n; ++k) g[k] = std::exp(a + (b - a) * k / (n - 1));
  return g;
}

LorentzianFit fit_lorentzian(const std::vector<double>& omega, const std::vector<double>& s) {
  if (omega.size() != s.size()) throw InvalidArgument("fit: omega and S differ in length");
  std::vector<double> w, ls;
  for (std::size_t k = 0; k < omega.size(); ++k) {
    if (s[k] > 0.0 && std::isfinite(s[k]) && omega[k] >= 0.0) {
      w.push_back(omega[k]);
      ls.push_back(std::log(s[k]));
    }
  }
  if (w.size() < 3) throw NumericalError("fit: fewer than 3 positive spectrum samples");
  // For fixed tau the best log(2 b^2 tau) is the mean offset, so only log tau
  // is searched.
  auto cost = [&](double log_tau, double* offset) {
    const double tau = std::exp(log_tau);
    double mean = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double wt = w[k] * tau;
      mean += ls[k] + std::log1p(wt * wt);
    }
    mean /= static_cast<double>(w.size());
    double c = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double wt = w[k] * tau;
      const double r = ls[k] - (mean - std::log1p(wt * wt));
      c += r * r;
    }
    if (offset) *offset = mean;
    return c;
  };
  const double lo = std::log(1e-3 / *std::max_element(w.begin(), w.end()));
  const double hi = std::log(1e3 / std::max(*std::min_element(w.begin(), w.end()), 1e-300));
  const int n_scan = 2000;
  int best = 0;
  double best_cost = INFINITY;
  for (int k = 0; k <= n_scan; ++k) {
    const double c = cost(lo + (hi - lo) * k / n_scan, nullptr);
    if (c < best_cost) {
      best_cost = c;
      best = k;
    }
  }
  double a = lo + (hi - lo) * std::max(0, best - 1) / n_scan;
  double b = lo + (hi - lo) * std::min(n_scan, best + 1) / n_scan;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
    const double x1 = b - gr * (b - a);
    const double x2 = a + gr * (b - a);
    if (cost(x1, nullptr) < cost(x2, nullptr)) b = x2; else a = x1;
  }
  double offset = 0.0;
  const double log_tau = 0.5 * (a + b);
  const double c = cost(log_tau, &offset);
  if (best == 0 || best == n_scan) throw NumericalError("Lorentzian fit did not converge inside the search range");
  LorentzianFit f;
  f.params.tau = std::exp(log_tau);
  f.params.b_rms = std::sqrt(std::exp(offset) / (2.0 * f.params.tau));
  f.rms_log_residual = std::sqrt(c / static_cast<double>(w.size()));
  if (!std::isfinite(f.params.b_rms) || !std::isfinite(f.params.tau)) {
    throw NumericalError("Lorentzian fit produced non-finite parameters");
  }
  return f;
}

BathSummary bath_noise_parameters(const BathGeometry& g, BathSpecies species, int placements,
                                  std::uint64_t seed, int grid_points) {
  if (placements < 1) throw InvalidArgument("need at least one placement");
  BathSummary out;
  out.omega = log_grid(1e2, 1e9, grid_points);
  out.mean_spectrum.assign(out.omega.size(), 0.0);
  const BathConstants k = BathConstants::for_species(species);
  for (int p = 0; p < placements; ++p) {
    const auto spins = place_surface_spins(g, derive_seed(seed, static_cast<std::uint64_t>(p)));
    const BathSpectrum spec = pair_field_spectrum(spins, k);
    const auto s = spec.evaluate(out.omega);
    for (std::size_t i = 0; i < s.size(); ++i) out.mean_spectrum[i] += s[i] / placements;
    out.fits.push_back(fit_lorentzian(out.omega, s));
  }
  double st = 0.0, sb = 0.0, s2t = 0.0, s2b = 0.0, t2 = 0.0;
  for (const auto& f : out.fits) {
    st += f.params.tau;
    sb += f.params.b_rms;
    s2t += f.params.tau * f.params.tau;
    s2b += f.params.b_rms * f.params.b_rms;
    t2 += f.t2();
  }
  const double n = placements;
  out.tau_mean = st / n;
  out.b_mean = sb / n;
  out.tau_std = std::sqrt(std::max(0.0, s2t / n - out.tau_mean * out.tau_mean));
  out.b_std = std::sqrt(std::max(0.0, s2b / n - out.b_mean * out.b_mean));
  out.t2_mean = t2 / n;
  return out;
}

}  // namespace nvsim
