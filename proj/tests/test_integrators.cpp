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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lindmag/integrators.hpp"
#include "lindmag/reference_solver.hpp"

#include <random>

using namespace lindmag;

namespace {

ComplexMatrix sigma_minus() {
  ComplexMatrix s = ComplexMatrix::Zero(2, 2);
  s(0, 1) = 1.0;
  return s;
}

LindbladModel two_level(const ComplexMatrix& h, std::vector<ComplexMatrix> jumps) {
  LindbladModel m;
  m.name = "two_level";
  m.hamiltonian = h;
  m.jump_ops = std::move(jumps);
  m.basis_labels = {"0", "1"};
  ComplexMatrix p1 = ComplexMatrix::Zero(2, 2);
  p1(1, 1) = 1.0;
  m.observables = {{"excited", p1}};
  StateVector e = StateVector::Zero(2);
  e(1) = 1.0;
  m.initial = InitialEnsemble::pure(e);
  return m;
}

// Diagonal H and diagonal jumps: every generator commutes.
LindbladModel commuting_model() {
  ComplexMatrix h = ComplexMatrix::Zero(3, 3);
  h.diagonal() << 0.3, -0.1, 0.7;
  ComplexMatrix l1 = ComplexMatrix::Zero(3, 3), l2 = ComplexMatrix::Zero(3, 3);
  l1.diagonal() << 0.2, 0.5, -0.3;
  l2.diagonal() << Complex(0.0, 0.4), 0.1, 0.2;
  LindbladModel m;
  m.name = "commuting";
  m.hamiltonian = h;
  m.jump_ops = {l1, l2};
  m.basis_labels = {"0", "1", "2"};
  m.observables = {{"p0", ComplexMatrix::Identity(3, 3)}};
  StateVector psi = StateVector::Constant(3, 1.0 / std::sqrt(3.0));
  m.initial = InitialEnsemble::pure(psi);
  return m;
}

StateVector random_state(Eigen::Index n, std::uint32_t seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> g;
  StateVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(g(gen), g(gen));
  return v / v.norm();
}

SchemeConfig scheme(int order, Unraveling u, double delta, bool rkmk = false) {
  SchemeConfig c;
  c.order = order;
  c.unraveling = u;
  c.delta = delta;
  c.rkmk_correction = rkmk;
  return c;
}

}  // namespace

TEST_CASE("drift forms") {
  const ComplexMatrix sm = sigma_minus();
  const LindbladModel m = two_level(ComplexMatrix::Zero(2, 2), {sm});
  CHECK((drift_linear(m) - (-0.5 * (sm + sm.adjoint()) * sm)).norm() < 1e-15);
  CHECK((ito_drift(m) - (-0.5 * sm.adjoint() * sm)).norm() < 1e-15);
}

TEST_CASE("Ito to Stratonovich conversion subtracts half of L squared") {
  const LindbladModel m = build_tfim(2, 1.0, 0.8, {0.1, 0.3});
  ComplexMatrix correction = ComplexMatrix::Zero(4, 4);
  for (const auto& l : m.jump_ops) correction += 0.5 * l * l;
  CHECK((drift_linear(m) - (ito_drift(m) - correction)).norm() < 1e-14);
}

TEST_CASE("nonlinear drift adds 2 Re<L> L and requires a unit state") {
  const LindbladModel m = build_fmo();
  const StateVector psi = random_state(5, 3);
  ComplexMatrix expected = drift_linear(m);
  for (const auto& l : m.jump_ops) expected += 2.0 * psi.dot(l * psi).real() * l;
  CHECK((drift_nonlinear(m, psi) - expected).norm() < 1e-14);
  CHECK_THROWS_AS(drift_nonlinear(m, 2.0 * psi), std::invalid_argument);
}

TEST_CASE("first- and second-order operators match their closed forms") {
  const LindbladModel m = build_tfim(1, 0.0, 0.9, {0.2});
  const ComplexMatrix g0 = drift_linear(m);
  const ComplexMatrix& g1 = m.jump_ops[0];
  CounterRng rng(1, 0, 1);
  const StochasticIncrementSet inc = sample_increments(1, 0.1, 50, 2, rng);
  const MagnusOperator o1 = magnus_omega(g0, m.jump_ops, inc, 1);
  CHECK((o1.omega - (0.1 * g0 + inc.w[0] * g1)).norm() < 1e-15);
  const MagnusOperator o2 = magnus_omega(g0, m.jump_ops, inc, 2);
  CHECK((o2.omega - (0.1 * g0 + inc.w[0] * g1 + inc.c2[0] * commutator(g0, g1))).norm() < 1e-15);
}

TEST_CASE("second-order cross-noise terms use the Levy area") {
  const LindbladModel m = build_tfim(2, 1.0, 1.0, {0.1, 0.1});
  // [L1, L2] = 0 for distinct sites, so add a non-commuting pair by hand.
  std::vector<ComplexMatrix> gs = {m.jump_ops[0], pauli_matrix("XZ") * 0.2};
  const ComplexMatrix g0 = drift_linear(m);
  CounterRng rng(2, 0, 1);
  const StochasticIncrementSet inc = sample_increments(2, 0.1, 50, 2, rng);
  REQUIRE(inc.has_levy);
  const MagnusOperator o2 = magnus_omega(g0, gs, inc, 2);
  ComplexMatrix expected = 0.1 * g0 + inc.w[0] * gs[0] + inc.w[1] * gs[1] + inc.c2[0] * commutator(g0, gs[0]) +
                           inc.c2[1] * commutator(g0, gs[1]) + inc.levy_at(0, 1) * commutator(gs[0], gs[1]);
  CHECK((o2.omega - expected).norm() < 1e-14);
}

TEST_CASE("commuting generators collapse every order onto the first") {
  const LindbladModel m = commuting_model();
  const ComplexMatrix g0 = drift_linear(m);
  const NoiseStructure s = analyze_structure(g0, m.jump_ops);
  CHECK(s.noise_commute);
  CHECK(s.simplified_order4);
  CHECK_FALSE(s.same_channel_nested);
  for (int trial = 0; trial < 20; ++trial) {
    CounterRng rng(4, static_cast<std::uint64_t>(trial), 1);
    const StochasticIncrementSet inc = sample_increments(2, 0.3, 100, 4, rng);
    const ComplexMatrix o1 = magnus_omega(g0, m.jump_ops, inc, 1).omega;
    for (int order = 2; order <= 4; ++order) CHECK((magnus_omega(g0, m.jump_ops, inc, order).omega - o1).norm() == 0.0);
  }
  const MagnusTermSet t(g0, m.jump_ops, 4, s);
  CHECK(t.size() == 3);
}

TEST_CASE("structure analysis and Scheme IV policy") {
  const LindbladModel tfim = build_tfim(2, 1.0, 1.0, {0.1, 0.1});
  const NoiseStructure s = analyze_structure(drift_linear(tfim), tfim.jump_ops);
  CHECK(s.noise_commute);
  CHECK_FALSE(s.simplified_order4);
  CHECK(effective_order(4, s, Order4Policy::downgrade) == 3);
  CHECK_THROWS_AS(effective_order(4, s, Order4Policy::error), StructureError);
  CHECK(effective_order(3, s, Order4Policy::error) == 3);
  SchemeConfig cfg = scheme(4, Unraveling::linear, 0.25);
  const StepEngine engine(tfim, cfg);
  CHECK(engine.downgraded());
  CHECK(engine.effective_order() == 3);
  cfg.order4_policy = Order4Policy::error;
  CHECK_THROWS_AS(StepEngine(tfim, cfg), StructureError);
}

TEST_CASE("RPM admits the simplified Scheme IV") {
  const LindbladModel rpm = build_rpm({});
  const StepEngine engine(rpm, scheme(4, Unraveling::linear, 1e-7));
  CHECK(engine.effective_order() == 4);
  CHECK_FALSE(engine.downgraded());
  CHECK(engine.structure().noise_commute);
}

TEST_CASE("third-order omissions are counted for mixed channels only") {
  const LindbladModel tfim = build_tfim(2, 1.0, 1.0, {0.1, 0.1});
  const StepEngine engine(tfim, scheme(3, Unraveling::linear, 0.25));
  CHECK(engine.omitted_terms() > 0);
  const LindbladModel one = build_tfim(1, 0.0, 1.0, {0.1});
  CHECK(StepEngine(one, scheme(3, Unraveling::linear, 0.25)).omitted_terms() == 0);
}

TEST_CASE("nonlinear steps keep the state on the unit sphere") {
  for (const LindbladModel& m : {build_tfim(2, 1.0, 1.0, {0.1, 0.1}), build_fmo()}) {
    for (int order : {1, 2, 3}) {
      const double delta = m.name == "fmo" ? 5.0 : 0.25;
      for (bool rkmk : {false, true}) {
        const StepEngine engine(m, scheme(order, Unraveling::nonlinear, delta, rkmk && order == 1));
        StateVector psi = m.initial.components.front().psi;
        for (int n = 1; n <= 50; ++n) {
          CounterRng rng(8, 0, static_cast<std::uint64_t>(n));
          psi = engine.step(psi, engine.sample(rng));
          CHECK(std::abs(psi.norm() - 1.0) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("wrappers agree with the cached engine") {
  const LindbladModel m = build_tfim(2, 1.0, 1.0, {0.1, 0.1});
  const SchemeConfig cfg = scheme(2, Unraveling::linear, 0.25);
  const StepEngine engine(m, cfg);
  const StateVector psi = random_state(4, 5);
  CounterRng rng(3, 1, 1);
  const StochasticIncrementSet inc = engine.sample(rng);
  CHECK((engine.step(psi, inc) - step_magnus(psi, m, cfg, inc)).norm() < 1e-14);
  CHECK((engine.step(psi, inc) - expm(engine.omega(psi, inc).omega) * psi).norm() < 1e-12);
}

TEST_CASE("Euler-Maruyama step formula") {
  const LindbladModel m = build_tfim(2, 1.0, 1.0, {0.1, 0.1});
  const StateVector psi = random_state(4, 6);
  CounterRng rng(1, 1, 1);
  const StochasticIncrementSet inc = sample_increments(2, 0.01, 10, 1, rng);
  StateVector expected = psi + 0.01 * ito_drift(m) * psi;
  for (int k = 0; k < 2; ++k) expected += inc.w[k] * m.jump_ops[k] * psi;
  CHECK((step_em(psi, m, 0.01, inc) - expected).norm() < 1e-15);
}

TEST_CASE("radius proxy is reported and flagged, not fatal") {
  const LindbladModel m = build_tfim(2, 1.0, 1.0, {0.1, 0.1});
  SchemeConfig cfg = scheme(1, Unraveling::linear, 4.0);
  const StepEngine engine(m, cfg);
  CounterRng rng(1, 1, 1);
  const StochasticIncrementSet inc = engine.sample(rng);
  StepReport report;
  CHECK_NOTHROW(engine.step(m.initial.components.front().psi, inc, &report));
  CHECK(report.radius_proxy >= 4.0 * spectral_norm(drift_linear(m)) - 1e-12);
  CHECK(report.radius_violation);
  CHECK(radius_exceeded(3.2));
  CHECK_FALSE(radius_exceeded(3.1));
}

TEST_CASE("scheme validation") {
  SchemeConfig c = scheme(5, Unraveling::linear, 0.1);
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = scheme(1, Unraveling::linear, 0.0);
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = scheme(1, Unraveling::linear, 0.1, true);
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = scheme(1, Unraveling::nonlinear, 0.1);
  c.method = Method::euler_maruyama;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK(scheme(2, Unraveling::nonlinear, 0.1).label() == "Scheme II (nonlinear)");
}

TEST_CASE("Lie-algebra Heun is second order on y' = -y^3") {
  // Exact y(t) = 1 / sqrt(1 + 2 t) from y(0) = 1.
  auto global_error = [](int n) {
    const double h = 1.0 / n;
    StateVector y(1);
    y(0) = 1.0;
    for (int k = 0; k < n; ++k) {
      y = rkmk_heun([h](const StateVector& v) {
            ComplexMatrix a(1, 1);
            a(0, 0) = -h * v(0) * v(0);
            return a;
          }, y, false);
    }
    return std::abs(y(0).real() - 1.0 / std::sqrt(3.0));
  };
  const double e1 = global_error(20), e2 = global_error(40), e3 = global_error(80);
  CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.1));
  CHECK(std::log2(e2 / e3) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("single-step mean of the linear unraveling is consistent with the Lindbladian") {
  // rho_1 = E[e^Omega psi psi^dag e^Omega^dag] agrees with e^{L Delta} rho to O(Delta^2).
  const LindbladModel m = two_level(pauli_matrix("X") * 0.5, {std::sqrt(0.5) * sigma_minus()});
  const double delta = 0.05;
  for (int order : {1, 2}) {
    const StepEngine engine(m, scheme(order, Unraveling::linear, delta));
    const StateVector psi = m.initial.components.front().psi;
    ComplexMatrix mean = ComplexMatrix::Zero(2, 2);
    const int n = 200000;
    for (int k = 0; k < n; ++k) {
      CounterRng rng(17, static_cast<std::uint64_t>(k), 1);
      const StateVector next = engine.step(psi, engine.sample(rng));
      mean += next * next.adjoint();
    }
    mean /= n;
    const DensityMatrix exact = propagate_exact(m, m.initial.density_matrix(), delta);
    CHECK((mean - exact).norm() < 5e-3);
  }
}
