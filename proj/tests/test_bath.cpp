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

#include <algorithm>
#include <numeric>
#include <random>

#include "nvsim/bath.hpp"

namespace nvsim {
namespace {

std::vector<double> nearest_neighbour_distances(const std::vector<Eigen::Vector3d>& p) {
  std::vector<double> nn(p.size(), 1e300);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < p.size(); ++j)
      if (i != j) nn[i] = std::min(nn[i], (p[i] - p[j]).norm());
  return nn;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<double> lorentzian(const std::vector<double>& w, double b, double tau) {
  std::vector<double> s(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) s[k] = 2.0 * b * b * tau / (1.0 + w[k] * w[k] * tau * tau);
  return s;
}

TEST(CouplingConstant, TabulatedValuesAtOneNanometre) {
  EXPECT_DOUBLE_EQ(coupling_constant(CouplingPair::ElectronElectron), kTwoPi * 52.0e6);
  EXPECT_DOUBLE_EQ(coupling_constant(CouplingPair::ElectronFluorine), kTwoPi * 74.4e3);
  EXPECT_DOUBLE_EQ(coupling_constant(CouplingPair::FluorineFluorine), kTwoPi * 106.3);
}

TEST(CouplingConstant, GyromagneticRatioConsistency) {
  // C_ab ~ gamma_a gamma_b, so C_eF^2 = C_ee C_FF up to table rounding.
  const double ee = coupling_constant(CouplingPair::ElectronElectron);
  const double ff = coupling_constant(CouplingPair::FluorineFluorine);
  const double ef = coupling_constant(CouplingPair::ElectronFluorine);
  EXPECT_NEAR(ef * ef / (ee * ff), 1.0, 0.01);
}

TEST(SpinCount, FiveNanometreSphere) {
  EXPECT_EQ(surface_spin_count(5.0, 0.25), 5026);
  const double ratio = static_cast<double>(surface_spin_count(10.0, 0.25)) / surface_spin_count(5.0, 0.25);
  EXPECT_NEAR(ratio, 4.0, 1e-3);
  EXPECT_THROW(surface_spin_count(0.0, 0.25), InvalidArgument);
  EXPECT_THROW(surface_spin_count(5.0, -1.0), InvalidArgument);
}

TEST(Placement, RejectsDegenerateGeometry) {
  BathGeometry g;
  g.radius_nm = 0.0;
  EXPECT_THROW(place_surface_spins(g, 1), InvalidArgument);
  g = BathGeometry{};
  g.jitter = 0.9;
  EXPECT_THROW(place_surface_spins(g, 1), InvalidArgument);
  g = BathGeometry{};
  g.n_spins = 1;
  EXPECT_THROW(place_surface_spins(g, 1), InvalidArgument);
}

TEST(Placement, PointsLieOnTheSphere) {
  BathGeometry g;
  g.radius_nm = 2.0;
  const auto p = place_surface_spins(g, 3);
  ASSERT_EQ(static_cast<int>(p.size()), surface_spin_count(2.0, 0.25));
  for (const auto& x : p) EXPECT_NEAR(x.norm(), 2.0, 1e-6);
}

TEST(Placement, DeterministicPerSeed) {
  BathGeometry g;
  g.radius_nm = 1.5;
  const auto a = place_surface_spins(g, 11), b = place_surface_spins(g, 11), c = place_surface_spins(g, 12);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs |= (a[i] - c[i]).norm() > 1e-9;
  EXPECT_TRUE(differs);
}

TEST(Placement, MeanNearestNeighbourMatchesSpacing) {
  const BathGeometry g;  // r = 5 nm, s = 0.25 nm, 10% jitter
  const auto p = place_surface_spins(g, 2024);
  EXPECT_EQ(p.size(), 5026u);
  auto nn = nearest_neighbour_distances(p);
  EXPECT_NEAR(mean(nn), 0.25, 0.05 * 0.25);
  // The histogram peaks at the spacing: the median sits there too.
  std::nth_element(nn.begin(), nn.begin() + nn.size() / 2, nn.end());
  EXPECT_NEAR(nn[nn.size() / 2], 0.25, 0.05 * 0.25);
}

TEST(Spectrum, SymmetricAndNonNegative) {
  BathGeometry g;
  g.radius_nm = 1.5;
  const auto p = place_surface_spins(g, 5);
  const auto spec = pair_field_spectrum(p, BathConstants::for_species(BathSpecies::Fluorine));
  for (double w : log_grid(1e2, 1e9, 60)) {
    EXPECT_EQ(spec(w), spec(-w));
    EXPECT_GE(spec(w), 0.0);
  }
}

TEST(Spectrum, QuadratureMatchesPairWeights) {
  BathGeometry g;
  g.radius_nm = 1.0;
  const auto p = place_surface_spins(g, 8);
  const auto spec = pair_field_spectrum(p, BathConstants::for_species(BathSpecies::Fluorine), Eigen::Vector3d::UnitZ(), 0.0);
  // Each Gaussian pair integrates to 2 pi * 2 w; sum exactly, peak by peak,
  // with a fine grid over +-10 sigma around each centre.
  double integral = 0.0;
  for (const auto& pk : spec.peaks()) {
    const int n = 2000;
    const double h = 20.0 * pk.width / n;
    double acc = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double x = -10.0 * pk.width + k * h;
      const double wgt = (k == 0 || k == n) ? 0.5 : 1.0;
      acc += wgt * std::exp(-x * x / (2.0 * pk.width * pk.width));
    }
    integral += 2.0 * kTwoPi * pk.weight * acc * h / std::sqrt(kTwoPi * pk.width * pk.width);
  }
  double weights = 0.0;
  for (const auto& pk : spec.peaks()) weights += pk.weight;
  EXPECT_NEAR(weights / spec.total_weight(), 1.0, 1e-9);
  EXPECT_NEAR(integral / kTwoPi / (2.0 * spec.total_weight()), 1.0, 1e-6);
}

TEST(Spectrum, MergingPreservesWeightAndShape) {
  BathGeometry g;
  g.radius_nm = 1.5;
  const auto p = place_surface_spins(g, 9);
  const auto k = BathConstants::for_species(BathSpecies::Fluorine);
  const auto exact = pair_field_spectrum(p, k, Eigen::Vector3d::UnitZ(), 0.0);
  const auto merged = pair_field_spectrum(p, k, Eigen::Vector3d::UnitZ(), 1e-2);
  EXPECT_LT(merged.peaks().size(), exact.peaks().size());
  EXPECT_NEAR(merged.total_weight() / exact.total_weight(), 1.0, 1e-12);
  const auto grid = log_grid(1e3, 1e7, 40);
  const auto fe = fit_lorentzian(grid, exact.evaluate(grid));
  const auto fm = fit_lorentzian(grid, merged.evaluate(grid));
  EXPECT_NEAR(fm.params.tau / fe.params.tau, 1.0, 0.02);
  EXPECT_NEAR(fm.params.b_rms / fe.params.b_rms, 1.0, 0.02);
}

TEST(Spectrum, InvariantUnderRelabelling) {
  BathGeometry g;
  g.radius_nm = 1.2;
  auto p = place_surface_spins(g, 4);
  const auto k = BathConstants::for_species(BathSpecies::Electron);
  const auto a = pair_field_spectrum(p, k, Eigen::Vector3d::UnitZ(), 0.0);
  std::mt19937_64 rng(1);
  std::shuffle(p.begin(), p.end(), rng);
  const auto b = pair_field_spectrum(p, k, Eigen::Vector3d::UnitZ(), 0.0);
  for (double w : log_grid(1e4, 1e10, 30)) EXPECT_NEAR(a(w) / b(w), 1.0, 1e-10) << w;
}

TEST(Spectrum, DoublingDistancesRescalesTheSpectrum) {
  // Every rate goes as r^-3, so S_2r(w / 8) = S_r(w) / 8 and the fit on a
  // grid scaled the same way gives b / 8 and 8 tau.
  BathGeometry g;
  g.radius_nm = 1.5;
  const auto p = place_surface_spins(g, 6);
  std::vector<Eigen::Vector3d> q;
  for (const auto& x : p) q.push_back(2.0 * x);
  const auto k = BathConstants::for_species(BathSpecies::Fluorine);
  const auto grid = log_grid(1e1, 1e9, 160);
  std::vector<double> scaled;
  for (double w : grid) scaled.push_back(w / 8.0);
  const auto s1 = pair_field_spectrum(p, k, Eigen::Vector3d::UnitZ(), 0.0).evaluate(grid);
  const auto s2 = pair_field_spectrum(q, k, Eigen::Vector3d::UnitZ(), 0.0).evaluate(scaled);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(s2[i], s1[i] / 8.0, 1e-9 * s1[i] + 1e-300) << i;
  const auto f1 = fit_lorentzian(grid, s1);
  const auto f2 = fit_lorentzian(scaled, s2);
  EXPECT_NEAR(f1.params.b_rms / f2.params.b_rms, 8.0, 1e-4);
  EXPECT_NEAR(f2.params.tau / f1.params.tau, 8.0, 1e-4);
}

TEST(Spectrum, EqualHyperfineCouplingsGiveNoWeight) {
  // Spins on a ring in the plane perpendicular to the field share one A_i.
  const std::vector<Eigen::Vector3d> square = {{2, 0, 0}, {0, 2, 0}, {-2, 0, 0}, {0, -2, 0}};
  const auto k = BathConstants::for_species(BathSpecies::Fluorine);
  EXPECT_THROW(pair_field_spectrum(square, k), NumericalError);
  // Tilting the ring splits A_i by O(z^2); with |b| >> |Delta| the weight
  // b^2 Delta^2 / (b^2 + Delta^2) then grows as z^4.
  std::vector<Eigen::Vector3d> ring;
  for (int i = 0; i < 24; ++i) {
    const double a = kTwoPi * i / 24.0;
    ring.emplace_back(2.0 * std::cos(a), 2.0 * std::sin(a), 0.0);
  }
  auto tilted = [&](double z) {
    std::vector<Eigen::Vector3d> r = ring;
    for (std::size_t i = 0; i < r.size(); ++i) r[i].z() = z * std::cos(kTwoPi * i / 24.0);
    return pair_field_spectrum(r, k, Eigen::Vector3d::UnitZ(), 0.0).total_weight();
  };
  const double w1 = tilted(1e-3), w2 = tilted(2e-3);
  EXPECT_GT(w1, 0.0);
  EXPECT_NEAR(w2 / w1, 16.0, 0.2);
}

TEST(Spectrum, RejectsBadInput) {
  const auto k = BathConstants::for_species(BathSpecies::Fluorine);
  std::vector<Eigen::Vector3d> two = {Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0)};
  EXPECT_THROW(pair_field_spectrum(two, k), InvalidArgument);
  std::vector<Eigen::Vector3d> dup = {Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(1, 0, 0),
                                      Eigen::Vector3d(0, 0, 1)};
  EXPECT_THROW(pair_field_spectrum(dup, k), InvalidArgument);
  EXPECT_THROW(parse_species("proton"), InvalidArgument);
  EXPECT_THROW(log_grid(0.0, 1.0, 10), InvalidArgument);
}

TEST(LorentzianFit, RecoversExactParameters) {
  const double b = kTwoPi * 30.2e3, tau = 2.5e-6;
  const auto w = log_grid(1e2, 1e9, 120);
  const auto f = fit_lorentzian(w, lorentzian(w, b, tau));
  EXPECT_NEAR(f.params.b_rms / b, 1.0, 1e-6);
  EXPECT_NEAR(f.params.tau / tau, 1.0, 1e-6);
  EXPECT_LT(f.rms_log_residual, 1e-6);
  EXPECT_NEAR(f.t2(), 1.0 / (b * b * tau), 1e-9);
}

TEST(LorentzianFit, RobustToOnePercentNoise) {
  const double b = kTwoPi * 3.6e6, tau = 21.7e-9;
  const auto w = log_grid(1e2, 1e9, 120);
  auto s = lorentzian(w, b, tau);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0.0, 0.01);
  for (double& v : s) v *= 1.0 + nd(rng);
  const auto f = fit_lorentzian(w, s);
  EXPECT_NEAR(f.params.b_rms / b, 1.0, 0.05);
  EXPECT_NEAR(f.params.tau / tau, 1.0, 0.05);
}

TEST(LorentzianFit, FailsWithoutAKnee) {
  const auto w = log_grid(1e2, 1e9, 50);
  std::vector<double> flat(w.size(), 1.0);
  // A flat spectrum drives tau to the edge of the search range.
  EXPECT_THROW(fit_lorentzian(w, flat), NumericalError);
  EXPECT_THROW(fit_lorentzian({1.0, 2.0}, {1.0, 1.0}), NumericalError);
}

TEST(LorentzianFit, DensityScaling) {
  // A denser shell flips faster and couples more strongly.
  BathGeometry sparse, dense;
  sparse.radius_nm = dense.radius_nm = 1.5;
  sparse.spacing_nm = 0.35;
  dense.spacing_nm = 0.25;
  const auto k = BathConstants::for_species(BathSpecies::Fluorine);
  const auto grid = log_grid(1e1, 1e9, 160);
  const auto fs = fit_lorentzian(grid, pair_field_spectrum(place_surface_spins(sparse, 1), k).evaluate(grid));
  const auto fd = fit_lorentzian(grid, pair_field_spectrum(place_surface_spins(dense, 1), k).evaluate(grid));
  EXPECT_LT(fd.params.tau, fs.params.tau);
  EXPECT_GT(fd.params.b_rms, fs.params.b_rms);
}

}  // namespace
}  // namespace nvsim
