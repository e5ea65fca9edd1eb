// Copyright 2026 The lindmag Authors
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

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <map>
#include <stdexcept>
#include <string>

namespace lindmag {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense exponential is used up to this dimension, Krylov above it.
inline constexpr Eigen::Index kDenseExpmMaxDim = 64;
inline constexpr double kDefaultExpmTol = 1e-12;
inline constexpr double kDefaultPauliDropThreshold = 1e-12;

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

bool all_finite(const ComplexMatrix& a);
bool all_finite(const StateVector& v);

double spectral_norm(const ComplexMatrix& a);
double one_norm(const ComplexMatrix& a);
double max_abs_entry(const ComplexMatrix& a);
bool is_hermitian(const ComplexMatrix& a, double tol);

// e^A by Pade-13 scaling and squaring.
ComplexMatrix expm(const ComplexMatrix& a);

// e^A v. Dense for dim <= kDenseExpmMaxDim, Krylov otherwise.
StateVector expm_action(const ComplexMatrix& a, const StateVector& v,
                        double tol = kDefaultExpmTol);

// Arnoldi with adaptive substeps; relative error target tol.
StateVector krylov_expm_action(const ComplexMatrix& a, const StateVector& v,
                               double tol = kDefaultExpmTol,
                               int krylov_dim = 30, int max_substeps = 10000);

struct PauliDecomposition {
  int n_qubits = 0;
  // Label character q acts on qubit q; qubit 0 is the most significant bit.
  std::map<std::string, Complex> terms;

  ComplexMatrix reconstruct() const;
};

// Single Pauli string as a dense matrix.
ComplexMatrix pauli_matrix(const std::string& label);

// P|b> = i^y_count (-1)^popcount(b & sign_mask) |b ^ flip_mask>.
struct PauliAction {
  int n_qubits = 0;
  unsigned flip_mask = 0;
  unsigned sign_mask = 0;
  int y_count = 0;
};
PauliAction pauli_action(const std::string& label);
StateVector apply_pauli(const PauliAction& p, const StateVector& v);

PauliDecomposition pauli_decompose(
    const ComplexMatrix& m, double drop_threshold = kDefaultPauliDropThreshold);

bool is_power_of_two(Eigen::Index n);
int qubits_for_dim(Eigen::Index n);
// Pads with zero rows and columns to the next power of two.
ComplexMatrix pad_to_power_of_two(const ComplexMatrix& m);
StateVector pad_to_power_of_two(const StateVector& v);

}  // namespace lindmag
