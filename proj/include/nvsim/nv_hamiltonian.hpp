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

#ifndef NVSIM_NV_HAMILTONIAN_HPP
#define NVSIM_NV_HAMILTONIAN_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "nvsim/core.hpp"

namespace nvsim {

namespace nv_defaults {
inline constexpr double kZeroFieldSplitting = kTwoPi * 2.87e9;    // rad/s
inline constexpr double kGammaElectron = kTwoPi * 28.0e9;         // rad/s/T
inline constexpr double kQuadrupole = kTwoPi * -4.95e6;           // rad/s
inline constexpr double kGammaNitrogen = kTwoPi * 3.1e6;          // rad/s/T
inline constexpr double kHyperfineParallel = kTwoPi * -2.16e6;    // rad/s
inline constexpr double kDipolarAt10nm = kTwoPi * 52.0e3;         // rad/s
}  // namespace nv_defaults

struct NVCenter {
  Eigen::Vector3d position_nm = Eigen::Vector3d::Zero();
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();  // symmetry axis, normalized on use
  double d = nv_defaults::kZeroFieldSplitting;
  double e = 0.0;
  double gamma_el = nv_defaults::kGammaElectron;
  void validate() const;
};

struct FieldConfig {
  Eigen::Vector3d b_tesla = Eigen::Vector3d::Zero();
};

// Spin-1 operators in the lab S_z basis ordered |+1>, |0>, |-1>.
Eigen::Matrix3cd spin1(char axis);

// D[(a.S)^2 - S^2/3] + E[(x'.S)^2 - (y'.S)^2] + gamma_el B.S written in the lab
// S_z basis, a the symmetry axis.
Eigen::Matrix3cd ground_state_hamiltonian(const NVCenter& nv, const FieldConfig& field);

// Angle between the symmetry axis and the field, in [0, pi/2].
double field_misalignment(const NVCenter& nv, const FieldConfig& field);

struct HyperfineParams {
  double quadrupole = nv_defaults::kQuadrupole;   // P
  double gamma_n = nv_defaults::kGammaNitrogen;   // gamma_I
  double a_parallel = nv_defaults::kHyperfineParallel;
  double spin = 1.0;                              // 1 for 14N, 1/2 for 15N
  void validate() const;
};

struct HyperfineLevel {
  double energy;  // rad/s
  double ms;      // <S_axis>
  double mi;      // <I_axis>
};

struct HyperfineSpectrum {
  std::vector<HyperfineLevel> levels;  // ascending energy
  bool secular_warning = false;        // electron not quantized along the axis
  std::string warning;
};

// Electron plus nitrogen nuclear spin levels with the secular hyperfine term
// A_par S_axis I_axis. Computed for reference; the gate dynamics ignore them.
HyperfineSpectrum hyperfine_levels(const NVCenter& nv, const FieldConfig& field,
                                   const HyperfineParams& hp);

// Two-level system: the adjacent eigenlevel pair with the largest gap.
struct DressedTLS {
  double gap = 0.0;                  // rad/s
  Eigen::Vector3cd lower;
  Eigen::Vector3cd upper;
  Eigen::Vector3d energies;          // all three, ascending
  int lower_index = 0;               // 0 or 1
  bool ambiguous = false;            // both adjacent gaps within 1%
};

DressedTLS dressed_tls(const NVCenter& nv, const FieldConfig& field);

// Dimensionless zz factor for the dipolar coupling of two NVs, such that the
// qubit Hamiltonian contains (J/2) s_z s_z with J = 2 xi mu(r).
double xi_factor(const DressedTLS& a, const DressedTLS& b, const Eigen::Vector3d& bond_unit);
double xi_factor(const NVCenter& a, const NVCenter& b, const FieldConfig& field);

// mu(r) = 2 pi 52 kHz (10 nm / r)^3
double dipolar_strength(double r_nm);

struct CouplingEdge {
  int i = 0;
  int j = 0;
  double j_rad_s = 0.0;  // nominal coupling
  double eps = 0.0;      // relative error, realized coupling is J (1 + eps)
  int order = 1;         // 1 nearest, 2 next shell, ...
  double r_nm = 0.0;
};

struct CouplingGraph {
  int n_qubits = 0;
  std::vector<CouplingEdge> edges;

  void validate() const;
  // Coupling of the nearest-neighbour shell, used to time gates.
  double nominal_j() const;
  double max_abs_j() const;
  std::vector<CouplingEdge> edges_up_to(int order) const;
  // Two-colouring of the nearest-neighbour graph; empty if not bipartite.
  std::vector<int> colouring() const;
  std::vector<int> degrees(int order = 1) const;
};

// Edges up to the given distance shell, J from xi_factor and dipolar_strength.
CouplingGraph coupling_graph(const std::vector<NVCenter>& centers, const FieldConfig& field,
                             int cutoff_order);

// Straight chain and square plaquette along x/y, axes along z.
std::vector<NVCenter> chain_centers(int n, double spacing_nm);
std::vector<NVCenter> square_centers(double spacing_nm);

struct OrientationStats {
  double b_tesla = 0.0;
  double xi_mean = 0.0, xi_var = 0.0, xi_min = 0.0, xi_max = 0.0;
  double gap_mean = 0.0, gap_var = 0.0, gap_min = 0.0, gap_max = 0.0;  // rad/s
  std::size_t ambiguous = 0;
};

// Random isotropic NV axes for a pair whose bond is perpendicular to B.
std::vector<OrientationStats> orientation_statistics(const std::vector<double>& fields_tesla,
                                                     std::size_t n_samples, std::uint64_t seed,
                                                     double bond_nm = 10.0);

}  // namespace nvsim

#endif  // NVSIM_NV_HAMILTONIAN_HPP
