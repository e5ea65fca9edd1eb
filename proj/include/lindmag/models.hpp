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

#include "lindmag/operator_core.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace lindmag {

struct NamedOperator {
  std::string name;
  ComplexMatrix op;
};

struct WeightedState {
  double weight = 1.0;
  StateVector psi;
};

// Mixture sum_k w_k |psi_k><psi_k| with sum w_k = 1.
struct InitialEnsemble {
  std::vector<WeightedState> components;

  static InitialEnsemble pure(const StateVector& psi);
  ComplexMatrix density_matrix() const;
  // Stratified assignment: trajectory l of n gets the component whose cumulative
  // weight interval contains (l + 0.5) / n.
  const StateVector& component_for(std::uint64_t trajectory, std::uint64_t n_traj) const;
  bool is_pure() const { return components.size() == 1; }
};

struct LindbladModel {
  std::string name;
  // Energy units; the generator uses hamiltonian / hbar.
  ComplexMatrix hamiltonian;
  double hbar = 1.0;
  // Rates absorbed: each entry is sqrt(Gamma_k) L_k in inverse-sqrt time units.
  std::vector<ComplexMatrix> jump_ops;
  std::vector<std::string> basis_labels;
  std::vector<NamedOperator> observables;
  InitialEnsemble initial;
  std::string time_unit = "1";
  std::string unit_note;

  Eigen::Index dim() const { return hamiltonian.rows(); }
  ComplexMatrix generator_hamiltonian() const { return hamiltonian / hbar; }
  const ComplexMatrix& observable(const std::string& name) const;
  // Throws std::invalid_argument on any violated invariant.
  void validate() const;
};

LindbladModel build_tfim(int n_sites, double j, double h, const std::vector<double>& gamma);

struct FmoParameters {
  // eV, upper triangle of the exciton block on sites 1..3.
  double h11 = 0.0267, h12 = -0.0129, h13 = 0.000632;
  double h22 = 0.0273, h23 = 0.00404, h33 = 0.0;
  // fs^-1
  double alpha = 3e-3;
  double beta = 5e-7;
  double gamma = 6.28e-3;
  // eV fs
  double hbar = 0.6582119569;
};

LindbladModel build_fmo(const FmoParameters& params = {});

struct RpmParameters {
  double theta = 0.0;
  double phi = 0.0;
  double b0 = 0.47;  // gauss
  double a_x = 0.345, a_y = 0.345, a_z = 9.0;  // gauss
  double g_factor = 2.0;
  double decay_rate = 1e4;  // s^-1
  // Spin operators are spin_scale * Pauli; 0.5 gives spin-1/2 operators.
  double spin_scale = 0.5;
  double mu_b = 9.27401e-21;  // erg / G
  double hbar = 1.05457e-27;  // erg s
};

// Basis: index 2*e + n for e in {s, t0, t+, t-}, n in {up, down}; then S, T shelves.
inline constexpr int kRpmShelfS = 8;
inline constexpr int kRpmShelfT = 9;
LindbladModel build_rpm(const RpmParameters& params);

LindbladModel parse_model_json(const nlohmann::json& j);
LindbladModel load_model_json(const std::string& path);

struct ModelInfo {
  std::string name;
  std::string description;
};
std::vector<ModelInfo> builtin_models();

}  // namespace lindmag
