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

#include "lindmag/models.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

namespace lindmag {

namespace {

ComplexMatrix ket_bra(Eigen::Index dim, Eigen::Index row, Eigen::Index col) {
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  m(row, col) = 1.0;
  return m;
}

StateVector basis_state(Eigen::Index dim, Eigen::Index k) {
  StateVector v = StateVector::Zero(dim);
  v(k) = 1.0;
  return v;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

ComplexMatrix site_operator(const ComplexMatrix& op, int site, int n_sites) {
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (int q = 0; q < n_sites; ++q) {
    out = kron(out, q == site ? op : ComplexMatrix::Identity(2, 2));
  }
  return out;
}

std::string bit_label(Eigen::Index index, int n_bits) {
  std::string s(static_cast<std::size_t>(n_bits), '0');
  for (int q = 0; q < n_bits; ++q) {
    if ((index >> (n_bits - 1 - q)) & 1) s[q] = '1';
  }
  return s;
}

void add_population_observables(LindbladModel& m) {
  for (Eigen::Index k = 0; k < m.dim(); ++k) {
    m.observables.push_back({"p" + m.basis_labels[k], ket_bra(m.dim(), k, k)});
  }
}

ComplexMatrix read_matrix(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols,
                          const std::string& what) {
  if (!j.is_object() || !j.contains("re")) {
    throw std::invalid_argument(what + ": expected object with 're' (and optional 'im')");
  }
  ComplexMatrix m = ComplexMatrix::Zero(rows, cols);
  auto fill = [&](const nlohmann::json& part, bool imag) {
    if (!part.is_array() || static_cast<Eigen::Index>(part.size()) != rows) {
      throw std::invalid_argument(what + ": wrong row count");
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto& row = part[static_cast<std::size_t>(r)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
        throw std::invalid_argument(what + ": wrong column count");
      }
      for (Eigen::Index c = 0; c < cols; ++c) {
        const double x = row[static_cast<std::size_t>(c)].get<double>();
        if (imag) {
          m(r, c).imag(x);
        } else {
          m(r, c).real(x);
        }
      }
    }
  };
  fill(j.at("re"), false);
  if (j.contains("im")) fill(j.at("im"), true);
  return m;
}

StateVector read_vector(const nlohmann::json& j, Eigen::Index dim, const std::string& what) {
  StateVector v = StateVector::Zero(dim);
  auto fill = [&](const nlohmann::json& part, bool imag) {
    if (!part.is_array() || static_cast<Eigen::Index>(part.size()) != dim) {
      throw std::invalid_argument(what + ": wrong length");
    }
    for (Eigen::Index k = 0; k < dim; ++k) {
      const double x = part[static_cast<std::size_t>(k)].get<double>();
      if (imag) {
        v(k).imag(x);
      } else {
        v(k).real(x);
      }
    }
  };
  if (j.is_object()) {
    fill(j.at("re"), false);
    if (j.contains("im")) fill(j.at("im"), true);
  } else {
    fill(j, false);
  }
  return v;
}

}  // namespace

InitialEnsemble InitialEnsemble::pure(const StateVector& psi) {
  InitialEnsemble e;
  e.components.push_back({1.0, psi});
  return e;
}

ComplexMatrix InitialEnsemble::density_matrix() const {
  if (components.empty()) throw std::invalid_argument("InitialEnsemble: empty");
  const Eigen::Index n = components.front().psi.size();
  ComplexMatrix rho = ComplexMatrix::Zero(n, n);
  for (const auto& c : components) rho += c.weight * c.psi * c.psi.adjoint();
  return rho;
}

const StateVector& InitialEnsemble::component_for(std::uint64_t trajectory,
                                                  std::uint64_t n_traj) const {
  if (components.empty()) throw std::invalid_argument("InitialEnsemble: empty");
  if (components.size() == 1 || n_traj == 0) return components.front().psi;
  const double u = (static_cast<double>(trajectory % n_traj) + 0.5) / static_cast<double>(n_traj);
  double cumulative = 0.0;
  for (const auto& c : components) {
    cumulative += c.weight;
    if (u < cumulative) return c.psi;
  }
  return components.back().psi;
}

const ComplexMatrix& LindbladModel::observable(const std::string& obs_name) const {
  for (const auto& o : observables) {
    if (o.name == obs_name) return o.op;
  }
  throw std::invalid_argument("unknown observable '" + obs_name + "' for model " + name);
}

void LindbladModel::validate() const {
  const Eigen::Index n = dim();
  if (n < 1 || hamiltonian.cols() != n) throw std::invalid_argument("model: hamiltonian not square");
  if (!all_finite(hamiltonian)) throw std::invalid_argument("model: non-finite hamiltonian");
  const double scale = std::max(1.0, max_abs_entry(hamiltonian));
  if (!is_hermitian(hamiltonian, 1e-12 * scale)) {
    throw std::invalid_argument("model: hamiltonian not Hermitian");
  }
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw std::invalid_argument("model: hbar must be > 0");
  for (const auto& l : jump_ops) {
    if (l.rows() != n || l.cols() != n) throw std::invalid_argument("model: jump op dimension");
    if (!all_finite(l)) throw std::invalid_argument("model: non-finite jump op");
  }
  for (const auto& o : observables) {
    if (o.op.rows() != n || o.op.cols() != n) {
      throw std::invalid_argument("model: observable '" + o.name + "' dimension");
    }
  }
  if (!basis_labels.empty() && static_cast<Eigen::Index>(basis_labels.size()) != n) {
    throw std::invalid_argument("model: basis label count");
  }
  if (initial.components.empty()) throw std::invalid_argument("model: no initial state");
  double total = 0.0;
  for (const auto& c : initial.components) {
    if (c.psi.size() != n) throw std::invalid_argument("model: initial state dimension");
    if (std::abs(c.psi.norm() - 1.0) > 1e-10) throw std::invalid_argument("model: initial state not normalized");
    if (!(c.weight > 0.0)) throw std::invalid_argument("model: initial weights must be positive");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-10) throw std::invalid_argument("model: initial weights must sum to 1");
}

LindbladModel build_tfim(int n_sites, double j, double h, const std::vector<double>& gamma) {
  if (n_sites < 1 || n_sites > 12) throw std::invalid_argument("build_tfim: n_sites out of range");
  if (static_cast<int>(gamma.size()) != n_sites) {
    throw std::invalid_argument("build_tfim: gamma length must equal n_sites");
  }
  for (double g : gamma) {
    if (!(g >= 0.0)) throw std::invalid_argument("build_tfim: negative rate");
  }
  const Eigen::Index dim = Eigen::Index{1} << n_sites;
  ComplexMatrix sx(2, 2), sz(2, 2), sm(2, 2);
  sx << 0, 1, 1, 0;
  sz << 1, 0, 0, -1;
  sm << 0, 1, 0, 0;

  LindbladModel m;
  m.name = "tfim";
  m.hamiltonian = ComplexMatrix::Zero(dim, dim);
  for (int q = 0; q + 1 < n_sites; ++q) {
    m.hamiltonian += j * site_operator(sz, q, n_sites) * site_operator(sz, q + 1, n_sites);
  }
  for (int q = 0; q < n_sites; ++q) m.hamiltonian -= h * site_operator(sx, q, n_sites);
  for (int q = 0; q < n_sites; ++q) {
    m.jump_ops.push_back(std::sqrt(gamma[q]) * site_operator(sm, q, n_sites));
  }
  for (Eigen::Index k = 0; k < dim; ++k) m.basis_labels.push_back(bit_label(k, n_sites));
  add_population_observables(m);
  m.initial = InitialEnsemble::pure(basis_state(dim, dim - 1));
  m.time_unit = "tJ";
  m.unit_note = "time in units of 1/J; site 1 is the most significant bit; initial state |1...1>";
  m.validate();
  return m;
}

LindbladModel build_fmo(const FmoParameters& p) {
  if (p.alpha < 0.0 || p.beta < 0.0 || p.gamma < 0.0) {
    throw std::invalid_argument("build_fmo: rates must be non-negative");
  }
  constexpr Eigen::Index dim = 5;
  LindbladModel m;
  m.name = "fmo";
  m.hamiltonian = ComplexMatrix::Zero(dim, dim);
  auto& h = m.hamiltonian;
  h(1, 1) = p.h11;
  h(2, 2) = p.h22;
  h(3, 3) = p.h33;
  h(1, 2) = h(2, 1) = p.h12;
  h(1, 3) = h(3, 1) = p.h13;
  h(2, 3) = h(3, 2) = p.h23;
  m.hbar = p.hbar;
  for (Eigen::Index i = 1; i <= 3; ++i) m.jump_ops.push_back(std::sqrt(p.alpha) * ket_bra(dim, i, i));
  for (Eigen::Index i = 1; i <= 3; ++i) m.jump_ops.push_back(std::sqrt(p.beta) * ket_bra(dim, 0, i));
  m.jump_ops.push_back(std::sqrt(p.gamma) * ket_bra(dim, 4, 3));
  m.basis_labels = {"0", "1", "2", "3", "4"};
  add_population_observables(m);
  m.initial = InitialEnsemble::pure(basis_state(dim, 1));
  m.time_unit = "fs";
  m.unit_note = "H in eV, hbar in eV fs, rates in 1/fs; |0> ground, |1..3> sites, |4> sink";
  m.validate();
  return m;
}

LindbladModel build_rpm(const RpmParameters& p) {
  if (!(p.b0 >= 0.0)) throw std::invalid_argument("build_rpm: B0 must be non-negative");
  if (!(p.decay_rate > 0.0)) throw std::invalid_argument("build_rpm: decay rate must be positive");
  ComplexMatrix sx(2, 2), sy(2, 2), sz(2, 2);
  sx << 0, 1, 1, 0;
  sy << 0, -kI, kI, 0;
  sz << 1, 0, 0, -1;
  const ComplexMatrix id2 = ComplexMatrix::Identity(2, 2);
  const std::array<ComplexMatrix, 3> pauli = {sx, sy, sz};
  // Product basis electron1 x electron2 x nucleus.
  auto e1 = [&](const ComplexMatrix& s) { return kron(kron(s, id2), id2); };
  auto e2 = [&](const ComplexMatrix& s) { return kron(kron(id2, s), id2); };
  auto nuc = [&](const ComplexMatrix& s) { return kron(kron(id2, id2), s); };
  const std::array<double, 3> field = {p.b0 * std::sin(p.theta) * std::cos(p.phi),
                                       p.b0 * std::sin(p.theta) * std::sin(p.phi),
                                       p.b0 * std::cos(p.theta)};
  const std::array<double, 3> hyperfine = {p.a_x, p.a_y, p.a_z};
  const double s = p.spin_scale;
  ComplexMatrix hp = ComplexMatrix::Zero(8, 8);
  for (int a = 0; a < 3; ++a) {
    hp += field[a] * s * (e1(pauli[a]) + e2(pauli[a]));
    hp += hyperfine[a] * s * s * nuc(pauli[a]) * e2(pauli[a]);
  }
  hp *= p.g_factor * p.mu_b;

  // Columns: s, t0, t+, t- in the two-electron product basis (up = 0).
  const double r = 1.0 / std::sqrt(2.0);
  ComplexMatrix pair(4, 4);
  pair << 0, 0, 1, 0,
          r, r, 0, 0,
         -r, r, 0, 0,
          0, 0, 0, 1;
  const ComplexMatrix u = kron(pair, id2);
  const ComplexMatrix h_pair = u.adjoint() * hp * u;

  constexpr Eigen::Index dim = 10;
  LindbladModel m;
  m.name = "rpm";
  m.hamiltonian = ComplexMatrix::Zero(dim, dim);
  m.hamiltonian.topLeftCorner(8, 8) = h_pair;
  m.hamiltonian = 0.5 * (m.hamiltonian + m.hamiltonian.adjoint()).eval();
  m.hbar = p.hbar;
  const double amp = std::sqrt(p.decay_rate);
  for (Eigen::Index k = 0; k < 8; ++k) {
    m.jump_ops.push_back(amp * ket_bra(dim, k < 2 ? kRpmShelfS : kRpmShelfT, k));
  }
  m.basis_labels = {"s_up", "s_dn", "t0_up", "t0_dn", "tp_up", "tp_dn", "tm_up", "tm_dn", "S", "T"};
  m.observables.push_back({"singlet_yield", ket_bra(dim, kRpmShelfS, kRpmShelfS)});
  m.observables.push_back({"triplet_yield", ket_bra(dim, kRpmShelfT, kRpmShelfT)});
  m.initial.components.push_back({0.5, basis_state(dim, 0)});
  m.initial.components.push_back({0.5, basis_state(dim, 1)});
  m.time_unit = "s";
  m.unit_note = "H in erg, hbar in erg s, time in s; spin operators = spin_scale * Pauli";
  m.validate();
  return m;
}

LindbladModel parse_model_json(const nlohmann::json& j) {
  try {
    LindbladModel m;
    m.name = j.value("name", std::string("user"));
    const auto dim = j.at("dim").get<Eigen::Index>();
    if (dim < 1) throw std::invalid_argument("dim must be >= 1");
    m.hamiltonian = read_matrix(j.at("hamiltonian"), dim, dim, "hamiltonian");
    m.hbar = j.value("hbar", 1.0);
    m.time_unit = j.value("time_unit", std::string("1"));
    m.unit_note = j.value("unit_note", std::string());
    if (j.contains("jump_ops")) {
      std::size_t k = 0;
      for (const auto& l : j.at("jump_ops")) {
        m.jump_ops.push_back(read_matrix(l, dim, dim, "jump_ops[" + std::to_string(k++) + "]"));
      }
    }
    if (j.contains("labels")) {
      m.basis_labels = j.at("labels").get<std::vector<std::string>>();
    } else {
      for (Eigen::Index k = 0; k < dim; ++k) m.basis_labels.push_back(std::to_string(k));
    }
    if (j.contains("observables")) {
      for (const auto& o : j.at("observables")) {
        const auto obs_name = o.at("name").get<std::string>();
        if (o.contains("projector")) {
          const auto k = o.at("projector").get<Eigen::Index>();
          if (k < 0 || k >= dim) throw std::invalid_argument("observable projector out of range");
          m.observables.push_back({obs_name, ket_bra(dim, k, k)});
        } else {
          m.observables.push_back({obs_name, read_matrix(o.at("matrix"), dim, dim, obs_name)});
        }
      }
    } else {
      add_population_observables(m);
    }
    if (j.contains("initial_state")) {
      StateVector psi = read_vector(j.at("initial_state"), dim, "initial_state");
      const double n = psi.norm();
      if (n == 0.0) throw std::invalid_argument("initial_state is zero");
      m.initial = InitialEnsemble::pure(psi / n);
    } else {
      m.initial = InitialEnsemble::pure(basis_state(dim, j.value("initial_index", 0)));
    }
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("model json: ") + e.what());
  }
}

LindbladModel load_model_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("model file " + path + ": " + e.what());
  }
  return parse_model_json(j);
}

std::vector<ModelInfo> builtin_models() {
  return {
      {"tfim", "2-site transverse-field Ising chain with amplitude damping (J=1, h=1, Gamma=0.1)"},
      {"fmo", "FMO 3-site + ground + sink exciton transfer (time in fs)"},
      {"rpm", "radical-pair compass model, 8 pair states + S/T shelves (time in s)"},
  };
}

}  // namespace lindmag
