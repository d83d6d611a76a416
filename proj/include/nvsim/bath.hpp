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

#ifndef NVSIM_BATH_HPP
#define NVSIM_BATH_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "nvsim/noise.hpp"

namespace nvsim {

// Dipolar coupling constants mu0 gamma_a gamma_b hbar / 4 pi, in rad/s nm^3.
enum class CouplingPair { ElectronElectron, ElectronFluorine, FluorineFluorine };
double coupling_constant(CouplingPair pair);

enum class BathSpecies { Fluorine, Electron };
BathSpecies parse_species(const std::string& name);

struct BathConstants {
  double nv_bath;    // coupling of a bath spin to the NV electron
  double bath_bath;  // mutual bath coupling
  static BathConstants for_species(BathSpecies s);
};

struct BathGeometry {
  double radius_nm = 5.0;
  double spacing_nm = 0.25;
  int n_spins = 0;         // 0: derived from the spacing
  double jitter = 0.1;     // max tangential displacement, fraction of spacing
  double rejection = 0.8;  // minimum distance, fraction of spacing
  void validate() const;
  int resolved_count() const;
  double resolved_spacing() const;
};

// floor(4 pi r^2 / s^2)
int surface_spin_count(double radius_nm, double spacing_nm);

// Fibonacci lattice on a sphere centred at the origin, relaxed towards even
// spacing and then jittered.
std::vector<Eigen::Vector3d> place_surface_spins(const BathGeometry& g, std::uint64_t seed);

struct SpectralPeak {
  double weight;  // b^2 Delta^2 / (b^2 + Delta^2), rad^2/s^2
  double center;  // E_ij, rad/s
  double width;   // sigma_ij, rad/s
};

// Sum of Gaussian pair peaks at +-E.
class BathSpectrum {
 public:
  BathSpectrum() = default;
  BathSpectrum(std::vector<SpectralPeak> peaks, double total_weight, std::size_t n_pairs);
  double operator()(double omega) const;
  std::vector<double> evaluate(const std::vector<double>& omega) const;
  const std::vector<SpectralPeak>& peaks() const { return peaks_; }
  // Sum of pair weights; (1/2pi) int S dw = 2 total_weight.
  double total_weight() const { return total_weight_; }
  std::size_t n_pairs() const { return n_pairs_; }

 private:
  std::vector<SpectralPeak> peaks_;
  double total_weight_ = 0.0;
  std::size_t n_pairs_ = 0;
};

// Pair-correlation spectrum seen by an NV at the origin with all spins
// quantized along field_dir. Peaks whose centre and width agree to within
// merge_tol (relative) are combined; merge_tol = 0 keeps every pair.
BathSpectrum pair_field_spectrum(const std::vector<Eigen::Vector3d>& spins_nm,
                                 const BathConstants& constants,
                                 const Eigen::Vector3d& field_dir = Eigen::Vector3d::UnitZ(),
                                 double merge_tol = 1e-2);

std::vector<double> log_grid(double lo, double hi, int n);

struct LorentzianFit {
  NoiseParams params;
  double rms_log_residual = 0.0;
  double t2() const { return 1.0 / (params.b_rms * params.b_rms * params.tau); }
};

// Least squares on log S against log(2 b^2 tau / (1 + w^2 tau^2)).
LorentzianFit fit_lorentzian(const std::vector<double>& omega, const std::vector<double>& s);

struct BathSummary {
  std::vector<LorentzianFit> fits;  // one per placement
  double tau_mean = 0.0, tau_std = 0.0;
  double b_mean = 0.0, b_std = 0.0;
  double t2_mean = 0.0;
  std::vector<double> omega;
  std::vector<double> mean_spectrum;
};

// Spectrum and fit for several random placements, fit grid [1e2, 1e9] rad/s.
BathSummary bath_noise_parameters(const BathGeometry& g, BathSpecies species, int placements,
                                  std::uint64_t seed, int grid_points = 120);

}  // namespace nvsim

#endif  // NVSIM_BATH_HPP
