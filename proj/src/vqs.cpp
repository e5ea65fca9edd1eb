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

#include "lindmag/vqs.hpp"

#include <cmath>
#include <fstream>
#include <optional>

#include <Eigen/Cholesky>
#include <Eigen/QR>

namespace lindmag {

namespace {

struct CircuitOp {
  bool rotation = false;
  int index = 0;  // rotation index or fixed gate index
};

std::vector<CircuitOp> circuit_ops(const HvaAnsatz& a) {
  std::vector<CircuitOp> ops;
  const int n_params = a.parameter_count();
  for (int p = 0; p <= n_params; ++p) {
    for (std::size_t g = 0; g < a.fixed_gates.size(); ++g) {
      if (a.fixed_gates[g].position == p) ops.push_back({false, static_cast<int>(g)});
    }
    if (p < n_params) ops.push_back({true, p});
  }
  return ops;
}

unsigned qubit_bit(int n_qubits, int q) { return 1u << (n_qubits - 1 - q); }

void apply_fixed(const FixedGate& g, int n_qubits, StateVector& psi) {
  const Eigen::Index dim = psi.size();
  const unsigned t = qubit_bit(n_qubits, g.target);
  switch (g.kind) {
    case GateKind::x:
    case GateKind::y:
    case GateKind::z: {
      std::string label(static_cast<std::size_t>(n_qubits), 'I');
      label[g.target] = g.kind == GateKind::x ? 'X' : (g.kind == GateKind::y ? 'Y' : 'Z');
      psi = apply_pauli(pauli_action(label), psi);
      return;
    }
    case GateKind::h: {
      const double r = 1.0 / std::sqrt(2.0);
      for (Eigen::Index b = 0; b < dim; ++b) {
        if (b & t) continue;
        const Complex a0 = psi(b), a1 = psi(b | t);
        psi(b) = r * (a0 + a1);
        psi(b | t) = r * (a0 - a1);
      }
      return;
    }
    case GateKind::s:
      for (Eigen::Index b = 0; b < dim; ++b) {
        if (b & t) psi(b) *= kI;
      }
      return;
    case GateKind::cnot: {
      const unsigned c = qubit_bit(n_qubits, g.control);
      for (Eigen::Index b = 0; b < dim; ++b) {
        if ((b & c) && !(b & t)) std::swap(psi(b), psi(b | t));
      }
      return;
    }
    case GateKind::cz: {
      const unsigned c = qubit_bit(n_qubits, g.control);
      for (Eigen::Index b = 0; b < dim; ++b) {
        if ((b & c) && (b & t)) psi(b) = -psi(b);
      }
      return;
    }
  }
}

struct CompiledAnsatz {
  const HvaAnsatz& a;
  std::vector<CircuitOp> ops;
  std::vector<PauliAction> actions;  // per generator in one block

  explicit CompiledAnsatz(const HvaAnsatz& ansatz) : a(ansatz), ops(circuit_ops(ansatz)) {
    for (const auto& g : ansatz.generators) actions.push_back(pauli_action(g));
  }
  const PauliAction& action(int k) const {
    return actions[static_cast<std::size_t>(k) % actions.size()];
  }
  void apply(const CircuitOp& op, const std::vector<double>& theta, StateVector& psi) const {
    if (!op.rotation) {
      apply_fixed(a.fixed_gates[static_cast<std::size_t>(op.index)], a.n_qubits, psi);
      return;
    }
    const double th = theta[static_cast<std::size_t>(op.index)];
    psi = std::cos(0.5 * th) * psi - kI * std::sin(0.5 * th) * apply_pauli(action(op.index), psi);
  }
  StateVector reference() const {
    StateVector psi = StateVector::Zero(Eigen::Index{1} << a.n_qubits);
    psi(0) = 1.0;
    return psi;
  }
};

void check_theta(const HvaAnsatz& a, const std::vector<double>& theta) {
  if (static_cast<int>(theta.size()) != a.parameter_count()) {
    throw std::invalid_argument("ansatz: theta length does not match parameter count");
  }
}

GateKind gate_from_string(const std::string& s) {
  if (s == "X") return GateKind::x;
  if (s == "Y") return GateKind::y;
  if (s == "Z") return GateKind::z;
  if (s == "H") return GateKind::h;
  if (s == "S") return GateKind::s;
  if (s == "CNOT" || s == "CX") return GateKind::cnot;
  if (s == "CZ") return GateKind::cz;
  throw std::invalid_argument("ansatz: unknown gate " + s);
}

RealVector solve_tangent(const RealMatrix& m, const RealVector& v, double reg) {
  const Eigen::Index n = m.rows();
  const RealMatrix a = m + reg * RealMatrix::Identity(n, n);
  Eigen::LDLT<RealMatrix> ldlt(a);
  if (ldlt.info() == Eigen::Success) {
    const RealVector x = ldlt.solve(v);
    if (x.allFinite() && (a * x - v).norm() <= 1e-8 * std::max(1.0, v.norm())) return x;
  }
  Eigen::CompleteOrthogonalDecomposition<RealMatrix> cod(a);
  cod.setThreshold(1e-12);
  const RealVector x = cod.solve(v);
  if (!x.allFinite()) {
    throw VqsStepError("mclachlan: tangent system singular beyond regularization (rank " +
                       std::to_string(cod.rank()) + " of " + std::to_string(n) + ")");
  }
  return x;
}

}  // namespace

void HvaAnsatz::validate() const {
  if (n_qubits < 1 || n_qubits > 20) throw std::invalid_argument("ansatz: n_qubits out of range");
  if (generators.empty()) throw std::invalid_argument("ansatz: no generators");
  if (blocks < 1) throw std::invalid_argument("ansatz: blocks must be >= 1");
  for (const auto& g : generators) {
    if (static_cast<int>(g.size()) != n_qubits) {
      throw std::invalid_argument("ansatz: generator '" + g + "' has wrong length");
    }
    pauli_action(g);
  }
  for (const auto& g : fixed_gates) {
    if (g.target < 0 || g.target >= n_qubits) throw std::invalid_argument("ansatz: gate target out of range");
    const bool two = g.kind == GateKind::cnot || g.kind == GateKind::cz;
    if (two && (g.control < 0 || g.control >= n_qubits || g.control == g.target)) {
      throw std::invalid_argument("ansatz: bad control qubit");
    }
    if (g.position < 0 || g.position > parameter_count()) {
      throw std::invalid_argument("ansatz: gate position out of range");
    }
  }
}

HvaAnsatz tfim_hva(int blocks) {
  HvaAnsatz a;
  a.n_qubits = 2;
  a.generators = {"IX", "XI", "IY", "YI", "IZ", "ZI", "ZZ"};
  a.blocks = blocks;
  a.fixed_gates = {{GateKind::x, 0, -1, 0}, {GateKind::x, 1, -1, 0}};
  a.validate();
  return a;
}

HvaAnsatz full_pauli_ansatz(int n_qubits, int blocks) {
  HvaAnsatz a;
  a.n_qubits = n_qubits;
  a.blocks = blocks;
  static constexpr char kChars[4] = {'I', 'X', 'Y', 'Z'};
  const std::size_t total = std::size_t{1} << (2 * n_qubits);
  for (std::size_t code = 1; code < total; ++code) {
    std::string label(static_cast<std::size_t>(n_qubits), 'I');
    for (int q = 0; q < n_qubits; ++q) label[q] = kChars[(code >> (2 * (n_qubits - 1 - q))) & 3u];
    a.generators.push_back(label);
  }
  a.validate();
  return a;
}

HvaAnsatz parse_ansatz_json(const nlohmann::json& j) {
  try {
    HvaAnsatz a;
    a.n_qubits = j.at("n_qubits").get<int>();
    a.generators = j.at("generators").get<std::vector<std::string>>();
    a.blocks = j.value("blocks", 1);
    if (j.contains("fixed_gates")) {
      for (const auto& g : j.at("fixed_gates")) {
        FixedGate f;
        f.kind = gate_from_string(g.at("gate").get<std::string>());
        f.target = g.at("target").get<int>();
        f.control = g.value("control", -1);
        f.position = g.value("position", 0);
        a.fixed_gates.push_back(f);
      }
    }
    a.validate();
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("ansatz json: ") + e.what());
  }
}

HvaAnsatz load_ansatz_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open ansatz file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("ansatz file " + path + ": " + e.what());
  }
  return parse_ansatz_json(j);
}

StateVector statevector(const HvaAnsatz& ansatz, const std::vector<double>& theta) {
  check_theta(ansatz, theta);
  const CompiledAnsatz c(ansatz);
  StateVector psi = c.reference();
  for (const auto& op : c.ops) c.apply(op, theta, psi);
  return psi;
}

std::vector<StateVector> derivative_states(const HvaAnsatz& ansatz, const std::vector<double>& theta) {
  check_theta(ansatz, theta);
  const CompiledAnsatz c(ansatz);
  std::vector<StateVector> xi(theta.size());
  StateVector psi = c.reference();
  for (std::size_t k = 0; k < c.ops.size(); ++k) {
    c.apply(c.ops[k], theta, psi);
    if (!c.ops[k].rotation) continue;
    StateVector x = apply_pauli(c.action(c.ops[k].index), psi);
    for (std::size_t l = k + 1; l < c.ops.size(); ++l) c.apply(c.ops[l], theta, x);
    xi[static_cast<std::size_t>(c.ops[k].index)] = std::move(x);
  }
  return xi;
}

StateVector derivative_state(const HvaAnsatz& ansatz, const std::vector<double>& theta, int i) {
  if (i < 0 || i >= ansatz.parameter_count()) throw std::invalid_argument("derivative_state: bad index");
  return derivative_states(ansatz, theta)[static_cast<std::size_t>(i)];
}

MvSystem assemble_m_v(const HvaAnsatz& ansatz, const std::vector<double>& theta,
                      const ComplexMatrix& effective_h, const ShotNoise& noise) {
  const Eigen::Index dim = Eigen::Index{1} << ansatz.n_qubits;
  if (effective_h.rows() != dim || effective_h.cols() != dim) {
    throw DimensionError("assemble_m_v: effective H must match the padded dimension");
  }
  const std::vector<StateVector> xi = derivative_states(ansatz, theta);
  const StateVector psi = statevector(ansatz, theta);
  const StateVector h_psi = effective_h * psi;
  const auto n = static_cast<Eigen::Index>(xi.size());
  MvSystem out;
  out.m.resize(n, n);
  out.v.resize(n);
  std::optional<CounterRng> rng;
  double sd = 0.0;
  if (noise.shots > 0) {
    rng.emplace(noise.seed, noise.stream, 0, StreamPurpose::shot_noise);
    sd = 1.0 / std::sqrt(static_cast<double>(noise.shots));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      double re = xi[i].dot(xi[j]).real();
      if (rng && i != j) re += sd * rng->normal();
      out.m(i, j) = out.m(j, i) = 0.25 * re;
    }
    double re = xi[i].dot(h_psi).real();
    if (rng) re += sd * effective_h.norm() * rng->normal();
    // Im<d_i psi|H psi> with d_i psi = -(i/2) xi_i.
    out.v(i) = 0.5 * re;
  }
  return out;
}

RealVector assemble_v_pauli(const HvaAnsatz& ansatz, const std::vector<double>& theta,
                            const PauliDecomposition& h) {
  if (h.n_qubits != ansatz.n_qubits) throw DimensionError("assemble_v_pauli: qubit count mismatch");
  const std::vector<StateVector> xi = derivative_states(ansatz, theta);
  const StateVector psi = statevector(ansatz, theta);
  std::vector<std::pair<Complex, StateVector>> p_psi;
  for (const auto& [label, c] : h.terms) p_psi.emplace_back(c, apply_pauli(pauli_action(label), psi));
  RealVector v(static_cast<Eigen::Index>(xi.size()));
  for (std::size_t i = 0; i < xi.size(); ++i) {
    double acc = 0.0;
    for (const auto& [c, pv] : p_psi) acc += (c * xi[i].dot(pv)).real();
    v(static_cast<Eigen::Index>(i)) = 0.5 * acc;
  }
  return v;
}

VariationalState mclachlan_step(const HvaAnsatz& ansatz, const VariationalState& state,
                                const ComplexMatrix& effective_h, double dt, double reg) {
  if (!(dt > 0.0)) throw std::invalid_argument("mclachlan_step: dt must be > 0");
  if (!(reg >= 0.0)) throw std::invalid_argument("mclachlan_step: reg must be >= 0");
  const std::size_t n = state.theta.size();
  auto rhs = [&](const std::vector<double>& theta, double gamma, std::vector<double>& dtheta,
                 double& dgamma) {
    const MvSystem mv = assemble_m_v(ansatz, theta, effective_h);
    const RealVector x = solve_tangent(mv.m, mv.v, reg);
    dtheta.assign(x.data(), x.data() + x.size());
    const StateVector psi = statevector(ansatz, theta);
    dgamma = gamma * psi.dot(effective_h * psi).imag();
  };
  std::vector<double> k1, k2, k3, k4, tmp(n);
  double g1, g2, g3, g4;
  auto shifted = [&](const std::vector<double>& k, double h) {
    for (std::size_t i = 0; i < n; ++i) tmp[i] = state.theta[i] + h * k[i];
    return tmp;
  };
  rhs(state.theta, state.gamma, k1, g1);
  rhs(shifted(k1, 0.5 * dt), state.gamma + 0.5 * dt * g1, k2, g2);
  rhs(shifted(k2, 0.5 * dt), state.gamma + 0.5 * dt * g2, k3, g3);
  rhs(shifted(k3, dt), state.gamma + dt * g3, k4, g4);
  VariationalState out;
  out.theta.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.theta[i] = state.theta[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  out.gamma = state.gamma + dt / 6.0 * (g1 + 2.0 * g2 + 2.0 * g3 + g4);
  for (double t : out.theta) {
    if (!std::isfinite(t)) throw VqsStepError("mclachlan_step: non-finite parameters");
  }
  if (!std::isfinite(out.gamma)) throw VqsStepError("mclachlan_step: non-finite norm tracker");
  return out;
}

VqsSeries vqs_trajectory(const LindbladModel& model, const SchemeConfig& cfg,
                         const HvaAnsatz& ansatz, const std::vector<double>& theta0, int n_steps,
                         const std::vector<std::string>& observables, StreamKey key,
                         const VqsOptions& options) {
  if (cfg.method != Method::magnus || cfg.rkmk_correction) {
    throw std::invalid_argument("vqs_trajectory: requires a Magnus scheme without rkmk correction");
  }
  if (n_steps < 1) throw std::invalid_argument("vqs_trajectory: n_steps must be >= 1");
  if (options.n_sub < 1) throw std::invalid_argument("vqs_trajectory: n_sub must be >= 1");
  ansatz.validate();
  const Eigen::Index dim = model.dim();
  if ((Eigen::Index{1} << ansatz.n_qubits) < dim) {
    throw std::invalid_argument("vqs_trajectory: ansatz does not cover the model dimension");
  }
  if (!model.initial.is_pure()) throw std::invalid_argument("vqs_trajectory: needs a pure initial state");
  const StepEngine engine(model, cfg);
  const bool linear = cfg.unraveling == Unraveling::linear;
  const StateVector psi0 = model.initial.components.front().psi;
  const StateVector padded0 = pad_to_power_of_two(psi0);
  VariationalState state{theta0, 1.0};
  if (1.0 - std::abs(statevector(ansatz, theta0).dot(padded0)) > options.initial_fit_tol) {
    throw std::invalid_argument("vqs_trajectory: theta0 does not prepare the initial state");
  }
  std::vector<ComplexMatrix> ops;
  for (const auto& name : observables) ops.push_back(pad_to_power_of_two(model.observable(name)));

  VqsSeries out;
  out.series.names = observables;
  out.series.values.assign(ops.size(), {});
  StateVector classical = psi0;
  auto record = [&](int n, const StateVector& vq) {
    out.series.times.push_back(n * cfg.delta);
    const double w = linear ? state.gamma * state.gamma : 1.0;
    for (std::size_t o = 0; o < ops.size(); ++o) {
      out.series.values[o].push_back(w * vq.dot(ops[o] * vq).real());
    }
    out.series.weights.push_back(w);
    const StateVector cp = pad_to_power_of_two(classical);
    out.fidelity_gap.push_back(1.0 - std::abs(vq.dot(cp)) / cp.norm());
  };
  StateVector vq = statevector(ansatz, state.theta);
  record(0, vq);
  for (int n = 1; n <= n_steps; ++n) {
    CounterRng rng(key.seed, key.trajectory, static_cast<std::uint64_t>(n));
    const StochasticIncrementSet inc = engine.sample(rng);
    const StateVector vq_native = vq.head(dim) / vq.head(dim).norm();
    const MagnusOperator op = engine.omega(vq_native, inc);
    const ComplexMatrix heff = pad_to_power_of_two(ComplexMatrix(kI * op.omega / cfg.delta));
    const double dt = cfg.delta / options.n_sub;
    for (int s = 0; s < options.n_sub; ++s) state = mclachlan_step(ansatz, state, heff, dt, options.reg);
    classical = engine.step(classical, inc);
    vq = statevector(ansatz, state.theta);
    record(n, vq);
  }
  out.final_state = state;
  return out;
}

}  // namespace lindmag
