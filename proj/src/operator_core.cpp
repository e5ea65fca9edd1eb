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

#include "lindmag/operator_core.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numbers>

namespace lindmag {

namespace {

void require_square(const ComplexMatrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() < 1) {
    throw DimensionError(std::string(what) + ": matrix must be square and non-empty");
  }
}

// Pade coefficients b_0..b_m for m = 3, 5, 7, 9, 13.
constexpr std::array<double, 4> kPade3 = {120.0, 60.0, 12.0, 1.0};
constexpr std::array<double, 6> kPade5 = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr std::array<double, 8> kPade7 = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                          25200.0,    1512.0,    56.0,      1.0};
constexpr std::array<double, 10> kPade9 = {17643225600.0, 8821612800.0, 2075673600.0,
                                           302702400.0,   30270240.0,   2162160.0,
                                           110880.0,      3960.0,       90.0,
                                           1.0};
constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0,  129060195264000.0,   10559470521600.0,
    670442572800.0,      33522128640.0,       1323241920.0,
    40840800.0,          960960.0,            16380.0,
    182.0,               1.0};
constexpr std::array<double, 5> kTheta = {1.495585217958292e-2, 2.539398330063230e-1,
                                          9.504178996162932e-1, 2.097847961257068e0,
                                          5.371920351148152e0};

template <std::size_t N>
ComplexMatrix pade_low(const ComplexMatrix& a, const std::array<double, N>& b) {
  const Eigen::Index n = a.rows();
  const ComplexMatrix ident = ComplexMatrix::Identity(n, n);
  const ComplexMatrix a2 = a * a;
  ComplexMatrix u = b[1] * ident;
  ComplexMatrix v = b[0] * ident;
  ComplexMatrix power = ident;
  for (std::size_t k = 2; k < N; k += 2) {
    power = power * a2;
    v += b[k] * power;
    if (k + 1 < N) u += b[k + 1] * power;
  }
  u = a * u;
  return (v - u).partialPivLu().solve(v + u);
}

ComplexMatrix pade13(const ComplexMatrix& a) {
  const auto& b = kPade13;
  const Eigen::Index n = a.rows();
  const ComplexMatrix ident = ComplexMatrix::Identity(n, n);
  const ComplexMatrix a2 = a * a;
  const ComplexMatrix a4 = a2 * a2;
  const ComplexMatrix a6 = a4 * a2;
  ComplexMatrix inner_u = b[13] * a6 + b[11] * a4 + b[9] * a2;
  ComplexMatrix u = a6 * inner_u + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident;
  u = a * u;
  ComplexMatrix inner_v = b[12] * a6 + b[10] * a4 + b[8] * a2;
  ComplexMatrix v = a6 * inner_v + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;
  return (v - u).partialPivLu().solve(v + u);
}

int popcount(unsigned x) { return std::popcount(x); }

Complex i_power(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

}  // namespace

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
    throw DimensionError("commutator: dimension mismatch");
  }
  return a * b - b * a;
}

bool all_finite(const ComplexMatrix& a) {
  return a.real().allFinite() && a.imag().allFinite();
}

bool all_finite(const StateVector& v) {
  return v.real().allFinite() && v.imag().allFinite();
}

double spectral_norm(const ComplexMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  return svd.singularValues()(0);
}

double one_norm(const ComplexMatrix& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

double max_abs_entry(const ComplexMatrix& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().maxCoeff();
}

bool is_hermitian(const ComplexMatrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return max_abs_entry(a - a.adjoint()) <= tol;
}

ComplexMatrix expm(const ComplexMatrix& a) {
  require_square(a, "expm");
  if (!all_finite(a)) throw NumericalError("expm: non-finite input");
  const double norm = one_norm(a);
  if (norm <= kTheta[0]) return pade_low(a, kPade3);
  if (norm <= kTheta[1]) return pade_low(a, kPade5);
  if (norm <= kTheta[2]) return pade_low(a, kPade7);
  if (norm <= kTheta[3]) return pade_low(a, kPade9);
  int s = 0;
  if (norm > kTheta[4]) s = static_cast<int>(std::ceil(std::log2(norm / kTheta[4])));
  ComplexMatrix r = pade13(a * std::ldexp(1.0, -s));
  for (int k = 0; k < s; ++k) r = r * r;
  if (!all_finite(r)) throw NumericalError("expm: non-finite result");
  return r;
}

StateVector expm_action(const ComplexMatrix& a, const StateVector& v, double tol) {
  require_square(a, "expm_action");
  if (a.rows() != v.size()) throw DimensionError("expm_action: dimension mismatch");
  if (!(tol > 0.0)) throw std::invalid_argument("expm_action: tol must be positive");
  if (!all_finite(a) || !all_finite(v)) throw NumericalError("expm_action: non-finite input");
  if (a.rows() <= kDenseExpmMaxDim) return expm(a) * v;
  return krylov_expm_action(a, v, tol);
}

StateVector krylov_expm_action(const ComplexMatrix& a, const StateVector& v, double tol,
                               int krylov_dim, int max_substeps) {
  require_square(a, "krylov_expm_action");
  if (a.rows() != v.size()) throw DimensionError("krylov_expm_action: dimension mismatch");
  const Eigen::Index n = a.rows();
  const int m = static_cast<int>(std::min<Eigen::Index>(krylov_dim, n));
  const double anorm = a.cwiseAbs().rowwise().sum().maxCoeff();
  double beta = v.norm();
  if (beta == 0.0 || anorm == 0.0) return v;

  constexpr double kGamma = 0.9;
  constexpr double kDelta = 1.2;
  constexpr int kMaxReject = 20;
  const double btol = 1e-14 * anorm;
  const double t_final = 1.0;
  double t_now = 0.0;
  const double fact =
      std::pow((m + 1) / std::numbers::e, m + 1) * std::sqrt(2.0 * std::numbers::pi * (m + 1));
  double t_new = (1.0 / anorm) * std::pow((fact * tol) / (4.0 * beta * anorm), 1.0 / m);
  auto round_step = [](double tau) {
    const double s = std::pow(10.0, std::floor(std::log10(tau)) - 1.0);
    return std::ceil(tau / s) * s;
  };
  t_new = round_step(t_new);

  StateVector w = v;
  ComplexMatrix basis(n, m + 1);
  int substeps = 0;
  while (t_now < t_final) {
    if (++substeps > max_substeps) {
      throw NumericalError("krylov_expm_action: substep cap reached");
    }
    double tau = std::min(t_final - t_now, t_new);
    ComplexMatrix h = ComplexMatrix::Zero(m + 2, m + 2);
    basis.col(0) = w / beta;
    int mb = m;
    int k1 = 2;
    double avnorm = 0.0;
    for (int j = 0; j < m; ++j) {
      StateVector p = a * basis.col(j);
      for (int i = 0; i <= j; ++i) {
        h(i, j) = basis.col(i).dot(p);
        p -= h(i, j) * basis.col(i);
      }
      const double s = p.norm();
      if (s < btol) {
        k1 = 0;
        mb = j + 1;
        tau = t_final - t_now;
        break;
      }
      h(j + 1, j) = s;
      basis.col(j + 1) = p / s;
    }
    if (k1 != 0) {
      h(m + 1, m) = 1.0;
      avnorm = (a * basis.col(m)).norm();
    }
    ComplexMatrix f;
    double err_loc = 0.0;
    double xm = 1.0 / m;
    for (int reject = 0;; ++reject) {
      const int mx = mb + k1;
      f = expm(tau * h.topLeftCorner(mx, mx));
      if (k1 == 0) {
        err_loc = btol;
        break;
      }
      const double phi1 = std::abs(beta * f(m, 0));
      const double phi2 = std::abs(beta * f(m + 1, 0) * avnorm);
      if (phi1 > 10.0 * phi2) {
        err_loc = phi2;
        xm = 1.0 / m;
      } else if (phi1 > phi2) {
        err_loc = (phi1 * phi2) / (phi1 - phi2);
        xm = 1.0 / m;
      } else {
        err_loc = phi1;
        xm = 1.0 / std::max(1, m - 1);
      }
      if (err_loc <= kDelta * tau * tol * beta) break;
      if (reject == kMaxReject) throw NumericalError("krylov_expm_action: step rejected too often");
      tau = round_step(kGamma * tau * std::pow(tau * tol * beta / err_loc, xm));
    }
    const int mx = mb + std::max(0, k1 - 1);
    StateVector next = StateVector::Zero(n);
    for (int i = 0; i < std::min(mx, m + 1); ++i) next += beta * f(i, 0) * basis.col(i);
    w = next;
    beta = w.norm();
    t_now += tau;
    const double ratio = err_loc > 0.0 ? tau * tol * beta / err_loc : 10.0;
    t_new = round_step(kGamma * tau * std::pow(std::max(ratio, 1e-300), xm));
    if (!all_finite(w)) throw NumericalError("krylov_expm_action: non-finite iterate");
    if (beta == 0.0) break;
  }
  return w;
}

bool is_power_of_two(Eigen::Index n) { return n >= 1 && (n & (n - 1)) == 0; }

int qubits_for_dim(Eigen::Index n) {
  int q = 0;
  while ((Eigen::Index{1} << q) < n) ++q;
  return q;
}

ComplexMatrix pad_to_power_of_two(const ComplexMatrix& m) {
  const Eigen::Index target = Eigen::Index{1} << qubits_for_dim(m.rows());
  ComplexMatrix out = ComplexMatrix::Zero(target, target);
  out.topLeftCorner(m.rows(), m.cols()) = m;
  return out;
}

StateVector pad_to_power_of_two(const StateVector& v) {
  const Eigen::Index target = Eigen::Index{1} << qubits_for_dim(v.size());
  StateVector out = StateVector::Zero(target);
  out.head(v.size()) = v;
  return out;
}

PauliAction pauli_action(const std::string& label) {
  PauliAction p;
  p.n_qubits = static_cast<int>(label.size());
  if (p.n_qubits > 30) throw DimensionError("pauli_action: too many qubits");
  for (int q = 0; q < p.n_qubits; ++q) {
    const unsigned bit = 1u << (p.n_qubits - 1 - q);
    switch (label[q]) {
      case 'I': break;
      case 'X': p.flip_mask |= bit; break;
      case 'Y':
        p.flip_mask |= bit;
        p.sign_mask |= bit;
        ++p.y_count;
        break;
      case 'Z': p.sign_mask |= bit; break;
      default: throw std::invalid_argument("invalid Pauli label: " + label);
    }
  }
  return p;
}

StateVector apply_pauli(const PauliAction& p, const StateVector& v) {
  const Eigen::Index dim = Eigen::Index{1} << p.n_qubits;
  if (v.size() != dim) throw DimensionError("apply_pauli: dimension mismatch");
  const Complex global = i_power(p.y_count);
  StateVector out(dim);
  for (Eigen::Index b = 0; b < dim; ++b) {
    const unsigned ub = static_cast<unsigned>(b);
    const double sign = (popcount(ub & p.sign_mask) & 1) ? -1.0 : 1.0;
    out(static_cast<Eigen::Index>(ub ^ p.flip_mask)) = global * sign * v(b);
  }
  return out;
}

ComplexMatrix pauli_matrix(const std::string& label) {
  const PauliAction p = pauli_action(label);
  const Eigen::Index dim = Eigen::Index{1} << p.n_qubits;
  const Complex global = i_power(p.y_count);
  ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index b = 0; b < dim; ++b) {
    const unsigned ub = static_cast<unsigned>(b);
    const double sign = (popcount(ub & p.sign_mask) & 1) ? -1.0 : 1.0;
    out(static_cast<Eigen::Index>(ub ^ p.flip_mask), b) = global * sign;
  }
  return out;
}

PauliDecomposition pauli_decompose(const ComplexMatrix& m, double drop_threshold) {
  require_square(m, "pauli_decompose");
  if (!is_power_of_two(m.rows())) {
    throw DimensionError("pauli_decompose: dimension must be a power of two");
  }
  if (!all_finite(m)) throw NumericalError("pauli_decompose: non-finite input");
  const int n = qubits_for_dim(m.rows());
  const Eigen::Index dim = m.rows();
  static constexpr char kChars[4] = {'I', 'X', 'Y', 'Z'};
  PauliDecomposition out;
  out.n_qubits = n;
  std::string label(static_cast<std::size_t>(n), 'I');
  const std::size_t total = std::size_t{1} << (2 * n);
  for (std::size_t code = 0; code < total; ++code) {
    for (int q = 0; q < n; ++q) label[q] = kChars[(code >> (2 * (n - 1 - q))) & 3u];
    const PauliAction p = pauli_action(label);
    const Complex global = std::conj(i_power(p.y_count));
    Complex acc{0.0, 0.0};
    for (Eigen::Index b = 0; b < dim; ++b) {
      const unsigned ub = static_cast<unsigned>(b);
      const double sign = (popcount(ub & p.sign_mask) & 1) ? -1.0 : 1.0;
      acc += sign * m(static_cast<Eigen::Index>(ub ^ p.flip_mask), b);
    }
    const Complex c = global * acc / static_cast<double>(dim);
    if (std::abs(c) >= drop_threshold && std::abs(c) > 0.0) out.terms.emplace(label, c);
  }
  return out;
}

ComplexMatrix PauliDecomposition::reconstruct() const {
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
  for (const auto& [label, c] : terms) out += c * pauli_matrix(label);
  return out;
}

}  // namespace lindmag
