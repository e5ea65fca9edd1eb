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

#include "lindmag/reference_solver.hpp"

#include <cmath>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

namespace lindmag {

namespace {

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

double expectation(const DensityMatrix& rho, const ComplexMatrix& o) {
  return (rho * o).trace().real();
}

}  // namespace

void validate_density_matrix(const DensityMatrix& rho) {
  if (rho.rows() != rho.cols() || rho.rows() < 1) {
    throw std::invalid_argument("density matrix must be square and non-empty");
  }
  if (!all_finite(rho)) throw NumericalError("density matrix has non-finite entries");
  if (!is_hermitian(rho, 1e-10)) throw std::invalid_argument("density matrix not Hermitian");
  if (std::abs(rho.trace() - Complex{1.0, 0.0}) > 1e-10) {
    throw std::invalid_argument("density matrix trace differs from 1");
  }
  const ComplexMatrix herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(herm, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-8) {
    throw std::invalid_argument("density matrix has a negative eigenvalue");
  }
}

StateVector vectorize(const DensityMatrix& rho) {
  return Eigen::Map<const StateVector>(rho.data(), rho.size());
}

DensityMatrix unvectorize(const StateVector& v, Eigen::Index dim) {
  if (v.size() != dim * dim) throw DimensionError("unvectorize: size mismatch");
  return Eigen::Map<const ComplexMatrix>(v.data(), dim, dim);
}

DensityMatrix Superoperator::apply(const DensityMatrix& rho) const {
  if (rho.rows() != dim || rho.cols() != dim) throw DimensionError("superoperator: dimension mismatch");
  return unvectorize(matrix * vectorize(rho), dim);
}

Superoperator build_superoperator(const LindbladModel& model) {
  model.validate();
  const Eigen::Index n = model.dim();
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  const ComplexMatrix h = model.generator_hamiltonian();
  Superoperator s;
  s.dim = n;
  s.matrix = -kI * (kron(id, h) - kron(h.transpose(), id));
  for (const auto& l : model.jump_ops) {
    const ComplexMatrix ldl = l.adjoint() * l;
    s.matrix += kron(l.conjugate(), l) - 0.5 * kron(id, ldl) - 0.5 * kron(ldl.transpose(), id);
  }
  return s;
}

DensityMatrix propagate_exact(const LindbladModel& model, const DensityMatrix& rho0, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("propagate_exact: t must be >= 0");
  validate_density_matrix(rho0);
  if (t == 0.0) return rho0;
  const Superoperator s = build_superoperator(model);
  const ComplexMatrix prop = expm(s.matrix * t);
  DensityMatrix rho = unvectorize(prop * vectorize(rho0), s.dim);
  if (!all_finite(rho)) throw NumericalError("propagate_exact: non-finite result");
  return rho;
}

const std::vector<double>& ExactSeries::series(const std::string& name) const {
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (names[k] == name) return values[k];
  }
  throw std::invalid_argument("ExactSeries: unknown observable " + name);
}

ExactSeries exact_series(const LindbladModel& model, const DensityMatrix& rho0, double delta,
                         int n_steps, const std::vector<std::string>& observables) {
  if (!(delta > 0.0) || n_steps < 0) throw std::invalid_argument("exact_series: bad grid");
  validate_density_matrix(rho0);
  const Superoperator s = build_superoperator(model);
  const ComplexMatrix step = expm(s.matrix * delta);
  ExactSeries out;
  out.names = observables;
  std::vector<const ComplexMatrix*> ops;
  for (const auto& name : observables) ops.push_back(&model.observable(name));
  out.values.assign(observables.size(), std::vector<double>(static_cast<std::size_t>(n_steps) + 1));
  StateVector v = vectorize(rho0);
  for (int k = 0; k <= n_steps; ++k) {
    if (k > 0) v = step * v;
    const DensityMatrix rho = unvectorize(v, s.dim);
    out.times.push_back(k * delta);
    for (std::size_t o = 0; o < ops.size(); ++o) out.values[o][k] = expectation(rho, *ops[o]);
  }
  if (!all_finite(v)) throw NumericalError("exact_series: non-finite result");
  return out;
}

SteadyStateResult steady_state(const LindbladModel& model, const DensityMatrix& rho0,
                               double t_stop, double tol) {
  if (!(t_stop > 0.0)) throw std::invalid_argument("steady_state: t_stop must be > 0");
  SteadyStateResult r;
  r.rho = propagate_exact(model, rho0, t_stop);
  const Superoperator s = build_superoperator(model);
  r.residual = s.apply(r.rho).norm();
  r.residual_warning = r.residual > tol;
  return r;
}

void write_series_csv(std::ostream& out, const ExactSeries& series) {
  out << "t";
  for (const auto& n : series.names) out << ',' << n;
  out << '\n';
  out.precision(17);
  for (std::size_t k = 0; k < series.times.size(); ++k) {
    out << series.times[k];
    for (const auto& v : series.values) out << ',' << v[k];
    out << '\n';
  }
}

}  // namespace lindmag
