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

#include "lindmag/ensemble.hpp"
#include "lindmag/integrators.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace lindmag {

enum class GateKind { x, y, z, h, s, cnot, cz };

struct FixedGate {
  GateKind kind = GateKind::x;
  int target = 0;
  int control = -1;
  // Applied before rotation number `position` (0 = first; parameter_count = last).
  int position = 0;
};

// Rotation k is e^{-i theta_k Q_k / 2} with Q_k = generators[k % G], applied in index order.
struct HvaAnsatz {
  int n_qubits = 1;
  std::vector<std::string> generators;  // one block, application order
  int blocks = 1;
  std::vector<FixedGate> fixed_gates;

  int parameter_count() const { return blocks * static_cast<int>(generators.size()); }
  const std::string& generator(int k) const {
    return generators[static_cast<std::size_t>(k) % generators.size()];
  }
  void validate() const;
};

// Two-site TFIM layer X2 X1 Y2 Y1 Z2 Z1 Z1Z2 on |11>.
HvaAnsatz tfim_hva(int blocks = 3);
// Every non-identity Pauli string on n qubits in one block.
HvaAnsatz full_pauli_ansatz(int n_qubits, int blocks = 1);

HvaAnsatz parse_ansatz_json(const nlohmann::json& j);
HvaAnsatz load_ansatz_json(const std::string& path);

struct VariationalState {
  std::vector<double> theta;
  double gamma = 1.0;
};

StateVector statevector(const HvaAnsatz& ansatz, const std::vector<double>& theta);
// xi_i with d psi / d theta_i = -(i/2) xi_i.
StateVector derivative_state(const HvaAnsatz& ansatz, const std::vector<double>& theta, int i);
std::vector<StateVector> derivative_states(const HvaAnsatz& ansatz, const std::vector<double>& theta);

struct MvSystem {
  RealMatrix m;
  RealVector v;
};

struct ShotNoise {
  long shots = 0;  // 0: exact inner products
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

// M_ij = Re<d_i psi|d_j psi>, V_i = Im<d_i psi|H|psi>.
MvSystem assemble_m_v(const HvaAnsatz& ansatz, const std::vector<double>& theta,
                      const ComplexMatrix& effective_h, const ShotNoise& noise = {});

// V from the Pauli decomposition of H, one Hadamard-test expectation per term.
RealVector assemble_v_pauli(const HvaAnsatz& ansatz, const std::vector<double>& theta,
                            const PauliDecomposition& effective_h);

class VqsStepError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One RK4 step of (M + reg I) theta' = V and Gamma' = Gamma Im<H>, M and V rebuilt per stage.
VariationalState mclachlan_step(const HvaAnsatz& ansatz, const VariationalState& state,
                                const ComplexMatrix& effective_h, double dt, double reg = 1e-8);

struct VqsOptions {
  int n_sub = 10;
  double reg = 1e-8;
  double initial_fit_tol = 1e-10;
};

struct VqsSeries {
  TrajectorySeries series;
  std::vector<double> fidelity_gap;  // 1 - |<psi_vqs|psi_classical>| per step (normalized states)
  VariationalState final_state;
};

// Classical trajectory driven by the same increments is run alongside for comparison.
VqsSeries vqs_trajectory(const LindbladModel& model, const SchemeConfig& cfg,
                         const HvaAnsatz& ansatz, const std::vector<double>& theta0, int n_steps,
                         const std::vector<std::string>& observables, StreamKey key,
                         const VqsOptions& options = {});

}  // namespace lindmag
