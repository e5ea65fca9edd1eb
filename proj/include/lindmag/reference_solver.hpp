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

#include "lindmag/models.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace lindmag {

using DensityMatrix = ComplexMatrix;

// Hermitian within 1e-10, unit trace within 1e-10, min eigenvalue >= -1e-8.
void validate_density_matrix(const DensityMatrix& rho);

// Column-stacking: vec(A X B) = (B^T kron A) vec(X).
struct Superoperator {
  Eigen::Index dim = 0;  // N; matrix is N^2 x N^2
  ComplexMatrix matrix;

  DensityMatrix apply(const DensityMatrix& rho) const;
};

StateVector vectorize(const DensityMatrix& rho);
DensityMatrix unvectorize(const StateVector& v, Eigen::Index dim);

Superoperator build_superoperator(const LindbladModel& model);

DensityMatrix propagate_exact(const LindbladModel& model, const DensityMatrix& rho0, double t);

struct ExactSeries {
  std::vector<double> times;
  std::vector<std::string> names;
  // values[o][n] = Tr(rho(times[n]) O_o)
  std::vector<std::vector<double>> values;

  const std::vector<double>& series(const std::string& name) const;
};

// Samples at t = n * delta for n = 0..n_steps.
ExactSeries exact_series(const LindbladModel& model, const DensityMatrix& rho0, double delta,
                         int n_steps, const std::vector<std::string>& observables);

struct SteadyStateResult {
  DensityMatrix rho;
  double residual = 0.0;  // Frobenius norm of L[rho]
  bool residual_warning = false;
};

SteadyStateResult steady_state(const LindbladModel& model, const DensityMatrix& rho0,
                               double t_stop, double tol = 1e-8);

void write_series_csv(std::ostream& out, const ExactSeries& series);

}  // namespace lindmag
