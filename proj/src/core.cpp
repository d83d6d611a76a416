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

#include "nvsim/core.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <set>

namespace nvsim {

int dim_of(int n_qubits) {
  if (n_qubits < 0 || n_qubits > 20) {
    throw InvalidArgument("qubit count out of range: " + std::to_string(n_qubits));
  }
  return 1 << n_qubits;
}

int n_qubits_of_dim(Eigen::Index dim) {
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim) {
    throw InvalidArgument("dimension " + std::to_string(dim) + " is not a power of two");
  }
  return n;
}

Mat pauli(char axis) {
  Mat m = Mat::Zero(2, 2);
  switch (axis) {
    case 'I': case 'i':
      m(0, 0) = 1; m(1, 1) = 1; break;
    case 'X': case 'x':
      m(0, 1) = 1; m(1, 0) = 1; break;
    case 'Y': case 'y':
      m(0, 1) = cplx(0, -1); m(1, 0) = cplx(0, 1); break;
    case 'Z': case 'z':
      m(0, 0) = 1; m(1, 1) = -1; break;
    default:
      throw InvalidArgument(std::string("unknown Pauli axis '") + axis + "'");
  }
  return m;
}

Mat identity(int dim) { return Mat::Identity(dim, dim); }

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Mat embed_local(const Mat& op, std::span<const int> sites, int n_qubits) {
  const int k = static_cast<int>(sites.size());
  if (op.rows() != op.cols() || op.rows() != (Eigen::Index{1} << k)) {
    throw InvalidArgument("local operator is " + std::to_string(op.rows()) + "x" +
                          std::to_string(op.cols()) + " but " + std::to_string(k) +
                          " sites were given");
  }
  std::set<int> seen;
  for (int s : sites) {
    if (s < 0 || s >= n_qubits) {
      throw InvalidArgument("site " + std::to_string(s) + " outside register of " +
                            std::to_string(n_qubits) + " qubits");
    }
    if (!seen.insert(s).second) {
      throw InvalidArgument("site " + std::to_string(s) + " listed twice");
    }
  }
  const Eigen::Index d = dim_of(n_qubits);
  std::uint64_t site_mask = 0;
  std::vector<int> shift(k);
  for (int a = 0; a < k; ++a) {
    shift[a] = n_qubits - 1 - sites[a];
    site_mask |= std::uint64_t{1} << shift[a];
  }
  auto local_index = [&](std::uint64_t full) {
    std::uint64_t idx = 0;
    for (int a = 0; a < k; ++a) idx = (idx << 1) | ((full >> shift[a]) & 1u);
    return idx;
  };
  auto scatter = [&](std::uint64_t local) {
    std::uint64_t full = 0;
    for (int a = 0; a < k; ++a) {
      if ((local >> (k - 1 - a)) & 1u) full |= std::uint64_t{1} << shift[a];
    }
    return full;
  };
  Mat out = Mat::Zero(d, d);
  const std::uint64_t local_dim = std::uint64_t{1} << k;
  for (std::uint64_t r = 0; r < static_cast<std::uint64_t>(d); ++r) {
    const std::uint64_t rest = r & ~site_mask;
    const std::uint64_t lr = local_index(r);
    for (std::uint64_t lc = 0; lc < local_dim; ++lc) {
      const cplx v = op(static_cast<Eigen::Index>(lr), static_cast<Eigen::Index>(lc));
      if (v != cplx(0)) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(rest | scatter(lc))) = v;
    }
  }
  return out;
}

Mat embed_local(const Mat& op, std::initializer_list<int> sites, int n_qubits) {
  std::vector<int> s(sites);
  return embed_local(op, std::span<const int>(s), n_qubits);
}

bool is_hermitian(const Mat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

bool is_unitary(const Mat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m.adjoint() * m - Mat::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= tol;
}

Hamiltonian::Hamiltonian(Mat m, double tol) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) {
    throw InvalidArgument("Hamiltonian must be square, got " + std::to_string(m_.rows()) + "x" +
                          std::to_string(m_.cols()));
  }
  if (!m_.allFinite()) throw InvalidArgument("Hamiltonian has non-finite entries");
  if (!is_hermitian(m_, tol)) throw InvalidArgument("Hamiltonian is not Hermitian");
}

StateVector::StateVector(Vec v, double tol) : v_(std::move(v)) {
  if (!v_.allFinite()) throw InvalidArgument("state has non-finite entries");
  if (std::abs(v_.norm() - 1.0) > tol) {
    throw InvalidArgument("state is not normalized (norm " + std::to_string(v_.norm()) + ")");
  }
}

DensityMatrix::DensityMatrix(Mat m, double tol) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw InvalidArgument("density matrix must be square");
  if (!is_hermitian(m_, tol)) throw InvalidArgument("density matrix is not Hermitian");
  if (std::abs(m_.trace() - cplx(1.0)) > tol) {
    throw InvalidArgument("density matrix trace is not one");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(m_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol) {
    throw InvalidArgument("density matrix has a negative eigenvalue");
  }
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
  return DensityMatrix(psi.vector() * psi.vector().adjoint());
}

Mat matrix_exponential(const Mat& h, double t) {
  if (h.rows() != h.cols()) throw InvalidArgument("matrix exponential needs a square matrix");
  if (!std::isfinite(t)) throw InvalidArgument("matrix exponential time is not finite");
  if (!is_hermitian(h, 1e-9)) throw InvalidArgument("matrix exponential input is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  Vec phases(h.rows());
  for (Eigen::Index k = 0; k < h.rows(); ++k) {
    phases(k) = std::exp(cplx(0, -es.eigenvalues()(k) * t));
  }
  const Mat& v = es.eigenvectors();
  Mat out = v * phases.asDiagonal() * v.adjoint();
  if (!out.allFinite()) throw NumericalError("matrix exponential is not finite");
  return out;
}

Mat matrix_exponential(const Hamiltonian& h, double t) { return matrix_exponential(h.matrix(), t); }

double state_fidelity(const Vec& psi, const Mat& rho) {
  if (psi.size() != rho.rows() || rho.rows() != rho.cols()) {
    throw InvalidArgument("fidelity: state of dim " + std::to_string(psi.size()) +
                          " against density matrix of dim " + std::to_string(rho.rows()));
  }
  return (psi.adjoint() * rho * psi)(0, 0).real();
}

double state_fidelity(const StateVector& psi, const DensityMatrix& rho) {
  return state_fidelity(psi.vector(), rho.matrix());
}

double hs_distance(const Mat& u, const Mat& v) {
  if (u.rows() != v.rows() || u.cols() != v.cols()) {
    throw InvalidArgument("hs_distance: shapes differ");
  }
  const double d = u.squaredNorm() + v.squaredNorm() - 2.0 * std::abs((u.adjoint() * v).trace());
  return std::max(0.0, d);
}

double hs_residual(const Mat& u, const Mat& v) { return std::sqrt(hs_distance(u, v)); }

Vec basis_state(int n_qubits, std::uint64_t index) {
  const int d = dim_of(n_qubits);
  if (index >= static_cast<std::uint64_t>(d)) throw InvalidArgument("basis index out of range");
  Vec v = Vec::Zero(d);
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return v;
}

Vec product_state(std::span<const Vec> single) {
  Vec out = Vec::Ones(1);
  for (const Vec& s : single) {
    Vec next(out.size() * s.size());
    for (Eigen::Index i = 0; i < out.size(); ++i) next.segment(i * s.size(), s.size()) = out(i) * s;
    out = std::move(next);
  }
  return out;
}

Vec x_eigenstate(int sign) {
  Vec v(2);
  v << 1.0, (sign >= 0 ? 1.0 : -1.0);
  return v / std::sqrt(2.0);
}

Vec plus_state(int n_qubits) {
  const int d = dim_of(n_qubits);
  return Vec::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
}

double pauli_expectation(const Mat& rho, const std::string& paulis) {
  const int n = n_qubits_of_dim(rho.rows());
  if (static_cast<int>(paulis.size()) != n) {
    throw InvalidArgument("Pauli string length " + std::to_string(paulis.size()) +
                          " does not match " + std::to_string(n) + " qubits");
  }
  Mat op = Mat::Ones(1, 1);
  for (char c : paulis) op = kron(op, pauli(c));
  return (op * rho).trace().real();
}

}  // namespace nvsim
