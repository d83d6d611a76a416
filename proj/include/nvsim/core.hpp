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

#ifndef NVSIM_CORE_HPP
#define NVSIM_CORE_HPP

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nvsim {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Bad input: wrong shape, out-of-range parameter, invalid configuration.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Something went wrong while computing (non-finite result, failed fit).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Qubit 0 is the leftmost tensor factor: |q0 q1 ... q_{n-1}>.
int dim_of(int n_qubits);
int n_qubits_of_dim(Eigen::Index dim);

Mat pauli(char axis);
Mat identity(int dim);
Mat kron(const Mat& a, const Mat& b);

// Embed a k-local operator (2^k x 2^k, factor order follows `sites`) into an
// n-qubit register.
Mat embed_local(const Mat& op, std::span<const int> sites, int n_qubits);
Mat embed_local(const Mat& op, std::initializer_list<int> sites, int n_qubits);

bool is_hermitian(const Mat& m, double tol = 1e-10);
bool is_unitary(const Mat& m, double tol = 1e-10);

// Hermitian operator wrapper; construction checks hermiticity.
class Hamiltonian {
 public:
  Hamiltonian() = default;
  explicit Hamiltonian(Mat m, double tol = 1e-9);
  const Mat& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  Mat m_;
};

// Unit-norm pure state.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(Vec v, double tol = 1e-9);
  const Vec& vector() const { return v_; }
  Eigen::Index dim() const { return v_.size(); }

 private:
  Vec v_;
};

// Trace-one positive semidefinite operator.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(Mat m, double tol = 1e-8);
  static DensityMatrix pure(const StateVector& psi);
  const Mat& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  Mat m_;
};

// exp(-i H t) through the eigendecomposition of H.
Mat matrix_exponential(const Hamiltonian& h, double t);
Mat matrix_exponential(const Mat& h, double t);

// <psi|rho|psi>
double state_fidelity(const StateVector& psi, const DensityMatrix& rho);
double state_fidelity(const Vec& psi, const Mat& rho);

// min over global phase of tr[(V - e^{i a} U)^dag (V - e^{i a} U)], which for
// unitaries equals 2d - 2|tr(U^dag V)|.
double hs_distance(const Mat& u, const Mat& v);
// Frobenius distance after phase gauging, sqrt of hs_distance.
double hs_residual(const Mat& u, const Mat& v);

// Computational-basis helpers.
Vec basis_state(int n_qubits, std::uint64_t index);
Vec product_state(std::span<const Vec> single);
Vec plus_state(int n_qubits);
// (|0> + sign |1>)/sqrt(2)
Vec x_eigenstate(int sign);

// Expectation of a product of single-qubit Paulis, e.g. "XZI".
double pauli_expectation(const Mat& rho, const std::string& paulis);

}  // namespace nvsim

#endif  // NVSIM_CORE_HPP
