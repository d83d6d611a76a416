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

#include "nvsim/nv_hamiltonian.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>

namespace nvsim {

namespace {

using Mat3 = Eigen::Matrix3cd;

Eigen::Vector3d unit_axis(const Eigen::Vector3d& a) {
  const double n = a.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw InvalidArgument("NV axis must be a non-zero vector");
  return a / n;
}

// Some unit vector perpendicular to a.
Eigen::Vector3d perpendicular(const Eigen::Vector3d& a) {
  Eigen::Vector3d ref = std::abs(a.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  return (ref - ref.dot(a) * a).normalized();
}

// Spin-j operators in the basis m = j, j-1, ..., -j.
Mat spin_operator(double j, char axis) {
  const int d = static_cast<int>(std::lround(2.0 * j)) + 1;
  Mat sp = Mat::Zero(d, d);
  Mat sz = Mat::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    const double m = j - k;
    sz(k, k) = m;
    if (k > 0) sp(k - 1, k) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
  }
  switch (axis) {
    case 'x': return 0.5 * (sp + sp.adjoint());
    case 'y': return cplx(0, -0.5) * (sp - sp.adjoint());
    case 'z': return sz;
    default: throw InvalidArgument(std::string("unknown spin axis '") + axis + "'");
  }
}

Mat along(double j, const Eigen::Vector3d& n) {
  return n.x() * spin_operator(j, 'x') + n.y() * spin_operator(j, 'y') + n.z() * spin_operator(j, 'z');
}

Eigen::Vector3d spin_expectation(const Eigen::Vector3cd& v) {
  Eigen::Vector3d s;
  s.x() = (v.adjoint() * spin1('x') * v)(0, 0).real();
  s.y() = (v.adjoint() * spin1('y') * v)(0, 0).real();
  s.z() = (v.adjoint() * spin1('z') * v)(0, 0).real();
  return s;
}

}  // namespace

void NVCenter::validate() const {
  unit_axis(axis);
  if (!std::isfinite(d) || !std::isfinite(e) || !std::isfinite(gamma_el)) {
    throw InvalidArgument("NV parameters must be finite");
  }
  if (!position_nm.allFinite()) throw InvalidArgument("NV position must be finite");
}

Eigen::Matrix3cd spin1(char axis) { return spin_operator(1.0, axis); }

Eigen::Matrix3cd ground_state_hamiltonian(const NVCenter& nv, const FieldConfig& field) {
  nv.validate();
  if (!field.b_tesla.allFinite()) throw InvalidArgument("magnetic field must be finite");
  const Eigen::Vector3d a = unit_axis(nv.axis);
  const Eigen::Vector3d xp = perpendicular(a);
  const Eigen::Vector3d yp = a.cross(xp);
  const Mat3 sa = along(1.0, a);
  const Mat3 sx = along(1.0, xp);
  const Mat3 sy = along(1.0, yp);
  Mat3 h = nv.d * (sa * sa - (2.0 / 3.0) * Mat3::Identity());
  h += nv.e * (sx * sx - sy * sy);
  h += nv.gamma_el * along(1.0, field.b_tesla);
  return h;
}

double field_misalignment(const NVCenter& nv, const FieldConfig& field) {
  const double b = field.b_tesla.norm();
  if (b == 0.0) return 0.0;
  const double c = std::abs(unit_axis(nv.axis).dot(field.b_tesla) / b);
  return std::acos(std::min(1.0, c));
}

void HyperfineParams::validate() const {
  const double twice = 2.0 * spin;
  if (!(spin > 0.0) || std::abs(twice - std::round(twice)) > 1e-12) {
    throw InvalidArgument("nuclear spin must be a positive multiple of 1/2");
  }
  if (!std::isfinite(quadrupole) || !std::isfinite(gamma_n) || !std::isfinite(a_parallel)) {
    throw InvalidArgument("hyperfine parameters must be finite");
  }
}

HyperfineSpectrum hyperfine_levels(const NVCenter& nv, const FieldConfig& field,
                                   const HyperfineParams& hp) {
  hp.validate();
  const Eigen::Vector3d a = unit_axis(nv.axis);
  const Mat he = ground_state_hamiltonian(nv, field);
  const int dn = static_cast<int>(std::lround(2.0 * hp.spin)) + 1;
  const Mat ia = along(hp.spin, a);
  const Mat hn = hp.quadrupole * ia * ia - hp.gamma_n * along(hp.spin, field.b_tesla);
  const Mat sa = along(1.0, a);
  const Mat h = kron(he, identity(dn)) + kron(identity(3), hn) + hp.a_parallel * kron(sa, ia);
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("hyperfine diagonalization failed");

  HyperfineSpectrum out;
  const Mat sa_full = kron(sa, identity(dn));
  const Mat ia_full = kron(identity(3), ia);
  for (Eigen::Index k = 0; k < h.rows(); ++k) {
    const Vec v = es.eigenvectors().col(k);
    out.levels.push_back({es.eigenvalues()(k), (v.adjoint() * sa_full * v)(0, 0).real(),
                          (v.adjoint() * ia_full * v)(0, 0).real()});
  }
  // The secular form needs S_axis to stay a good quantum number: the
  // transverse Zeeman term must be small against the axial level spacing.
  const double b = field.b_tesla.norm();
  const double b_par = std::abs(a.dot(field.b_tesla));
  const double b_perp = std::sqrt(std::max(0.0, b * b - b_par * b_par));
  const double mixing = nv.gamma_el * b_perp;
  const double spacing = std::abs(std::abs(nv.d) - nv.gamma_el * b_par);
  if (mixing > 0.1 * spacing) {
    out.secular_warning = true;
    out.warning = "field is " + std::to_string(field_misalignment(nv, field) * 180.0 / kPi) +
                  " deg off the NV axis; secular hyperfine form is not reliable";
  }
  return out;
}

DressedTLS dressed_tls(const NVCenter& nv, const FieldConfig& field) {
  const Mat3 h = ground_state_hamiltonian(nv, field);
  Eigen::SelfAdjointEigenSolver<Mat3> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("NV diagonalization failed");
  DressedTLS t;
  t.energies = es.eigenvalues();
  const double g0 = t.energies(1) - t.energies(0);
  const double g1 = t.energies(2) - t.energies(1);
  t.lower_index = g1 > g0 ? 1 : 0;
  t.gap = std::max(g0, g1);
  t.lower = es.eigenvectors().col(t.lower_index);
  t.upper = es.eigenvectors().col(t.lower_index + 1);
  const double small = std::min(g0, g1);
  t.ambiguous = small > 0.0 && t.gap / small < 1.01;
  return t;
}

double xi_factor(const DressedTLS& a, const DressedTLS& b, const Eigen::Vector3d& bond_unit) {
  const double n = bond_unit.norm();
  if (!(n > 0.0)) throw InvalidArgument("bond vector must be non-zero");
  const Eigen::Vector3d e = bond_unit / n;
  // The dipolar operator is a sum of products, so its diagonal elements in a
  // product basis factorize into single-spin expectation values.
  const Eigen::Matrix3d m = Eigen::Matrix3d::Identity() - 3.0 * e * e.transpose();
  const Eigen::Vector3d da = spin_expectation(a.lower) - spin_expectation(a.upper);
  const Eigen::Vector3d db = spin_expectation(b.lower) - spin_expectation(b.upper);
  return 0.25 * da.dot(m * db);
}

double xi_factor(const NVCenter& a, const NVCenter& b, const FieldConfig& field) {
  const Eigen::Vector3d bond = b.position_nm - a.position_nm;
  if (bond.norm() == 0.0) throw InvalidArgument("two NV centers share a position");
  return xi_factor(dressed_tls(a, field), dressed_tls(b, field), bond);
}

double dipolar_strength(double r_nm) {
  if (!(r_nm > 0.0) || !std::isfinite(r_nm)) {
    throw InvalidArgument("distance must be positive, got " + std::to_string(r_nm));
  }
  const double x = 10.0 / r_nm;
  return nv_defaults::kDipolarAt10nm * x * x * x;
}

void CouplingGraph::validate() const {
  if (n_qubits < 1) throw InvalidArgument("coupling graph needs at least one qubit");
  for (const auto& e : edges) {
    if (e.i < 0 || e.j < 0 || e.i >= n_qubits || e.j >= n_qubits || e.i == e.j) {
      throw InvalidArgument("coupling edge (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                            ") is invalid for " + std::to_string(n_qubits) + " qubits");
    }
    if (!std::isfinite(e.j_rad_s) || !std::isfinite(e.eps)) {
      throw InvalidArgument("coupling values must be finite");
    }
    if (e.order < 1) throw InvalidArgument("edge order must be at least 1");
  }
}

double CouplingGraph::nominal_j() const {
  for (const auto& e : edges) {
    if (e.order == 1) return e.j_rad_s;
  }
  throw InvalidArgument("coupling graph has no nearest-neighbour edge");
}

double CouplingGraph::max_abs_j() const {
  double m = 0.0;
  for (const auto& e : edges) m = std::max(m, std::abs(e.j_rad_s * (1.0 + e.eps)));
  return m;
}

std::vector<CouplingEdge> CouplingGraph::edges_up_to(int order) const {
  std::vector<CouplingEdge> out;
  for (const auto& e : edges) {
    if (e.order <= order) out.push_back(e);
  }
  return out;
}

std::vector<int> CouplingGraph::colouring() const {
  std::vector<std::vector<int>> adj(n_qubits);
  for (const auto& e : edges) {
    if (e.order != 1) continue;
    adj[e.i].push_back(e.j);
    adj[e.j].push_back(e.i);
  }
  std::vector<int> colour(n_qubits, -1);
  for (int s = 0; s < n_qubits; ++s) {
    if (colour[s] >= 0) continue;
    colour[s] = 0;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : adj[u]) {
        if (colour[v] < 0) {
          colour[v] = 1 - colour[u];
          q.push(v);
        } else if (colour[v] == colour[u]) {
          return {};
        }
      }
    }
  }
  return colour;
}

std::vector<int> CouplingGraph::degrees(int order) const {
  std::vector<int> d(n_qubits, 0);
  for (const auto& e : edges) {
    if (e.order != order) continue;
    ++d[e.i];
    ++d[e.j];
  }
  return d;
}

CouplingGraph coupling_graph(const std::vector<NVCenter>& centers, const FieldConfig& field,
                             int cutoff_order) {
  if (centers.empty()) throw InvalidArgument("no NV centers given");
  if (cutoff_order < 1) throw InvalidArgument("cutoff order must be at least 1");
  const int n = static_cast<int>(centers.size());
  std::vector<DressedTLS> tls;
  for (const auto& c : centers) tls.push_back(dressed_tls(c, field));

  struct Pair {
    int i, j;
    double r;
  };
  std::vector<Pair> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double r = (centers[j].position_nm - centers[i].position_nm).norm();
      if (r == 0.0) throw InvalidArgument("two NV centers share a position");
      pairs.push_back({i, j, r});
    }
  }
  std::vector<double> shells;
  {
    std::vector<double> rs;
    for (const auto& p : pairs) rs.push_back(p.r);
    std::sort(rs.begin(), rs.end());
    for (double r : rs) {
      if (shells.empty() || r > shells.back() * (1.0 + 1e-6)) shells.push_back(r);
    }
  }
  CouplingGraph g;
  g.n_qubits = n;
  for (const auto& p : pairs) {
    int order = 1;
    while (order <= static_cast<int>(shells.size()) && p.r > shells[order - 1] * (1.0 + 1e-6)) ++order;
    if (order > cutoff_order) continue;
    const Eigen::Vector3d bond = centers[p.j].position_nm - centers[p.i].position_nm;
    const double xi = xi_factor(tls[p.i], tls[p.j], bond);
    g.edges.push_back({p.i, p.j, 2.0 * xi * dipolar_strength(p.r), 0.0, order, p.r});
  }
  return g;
}

std::vector<NVCenter> chain_centers(int n, double spacing_nm) {
  if (n < 1) throw InvalidArgument("chain needs at least one site");
  if (!(spacing_nm > 0.0)) throw InvalidArgument("spacing must be positive");
  std::vector<NVCenter> out(n);
  for (int k = 0; k < n; ++k) out[k].position_nm = Eigen::Vector3d(k * spacing_nm, 0.0, 0.0);
  return out;
}

std::vector<NVCenter> square_centers(double spacing_nm) {
  if (!(spacing_nm > 0.0)) throw InvalidArgument("spacing must be positive");
  std::vector<NVCenter> out(4);
  out[0].position_nm = Eigen::Vector3d(0, 0, 0);
  out[1].position_nm = Eigen::Vector3d(spacing_nm, 0, 0);
  out[2].position_nm = Eigen::Vector3d(spacing_nm, spacing_nm, 0);
  out[3].position_nm = Eigen::Vector3d(0, spacing_nm, 0);
  return out;
}

std::vector<OrientationStats> orientation_statistics(const std::vector<double>& fields_tesla,
                                                     std::size_t n_samples, std::uint64_t seed,
                                                     double bond_nm) {
  if (n_samples < 2) throw InvalidArgument("need at least two orientation samples");
  if (!(bond_nm > 0.0)) throw InvalidArgument("bond length must be positive");
  std::vector<OrientationStats> out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  auto random_axis = [&] {
    Eigen::Vector3d v;
    do {
      v = Eigen::Vector3d(nd(rng), nd(rng), nd(rng));
    } while (v.norm() < 1e-12);
    return Eigen::Vector3d(v.normalized());
  };
  const Eigen::Vector3d bond = Eigen::Vector3d::UnitX() * bond_nm;
  for (double b : fields_tesla) {
    if (!std::isfinite(b) || b < 0.0) throw InvalidArgument("field magnitude must be non-negative");
    FieldConfig field{Eigen::Vector3d(0.0, 0.0, b)};
    OrientationStats st;
    st.b_tesla = b;
    st.xi_min = st.gap_min = std::numeric_limits<double>::infinity();
    st.xi_max = st.gap_max = -std::numeric_limits<double>::infinity();
    double xi_m2 = 0.0, gap_m2 = 0.0;
    std::size_t n_gap = 0;
    for (std::size_t s = 0; s < n_samples; ++s) {
      NVCenter a, c;
      a.axis = random_axis();
      c.axis = random_axis();
      c.position_nm = bond;
      const DressedTLS ta = dressed_tls(a, field);
      const DressedTLS tc = dressed_tls(c, field);
      if (ta.ambiguous || tc.ambiguous) ++st.ambiguous;
      const double xi = xi_factor(ta, tc, bond);
      // Welford updates.
      const double dx = xi - st.xi_mean;
      st.xi_mean += dx / static_cast<double>(s + 1);
      xi_m2 += dx * (xi - st.xi_mean);
      st.xi_min = std::min(st.xi_min, xi);
      st.xi_max = std::max(st.xi_max, xi);
      for (double g : {ta.gap, tc.gap}) {
        ++n_gap;
        const double dg = g - st.gap_mean;
        st.gap_mean += dg / static_cast<double>(n_gap);
        gap_m2 += dg * (g - st.gap_mean);
        st.gap_min = std::min(st.gap_min, g);
        st.gap_max = std::max(st.gap_max, g);
      }
    }
    st.xi_var = xi_m2 / static_cast<double>(n_samples);
    st.gap_var = gap_m2 / static_cast<double>(n_gap);
    out.push_back(st);
  }
  return out;
}

}  // namespace nvsim
