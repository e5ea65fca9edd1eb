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

// Acceptance criteria AC1..AC11. Prints one "ACn PASS|FAIL" line per criterion.
#include "lindmag/ensemble.hpp"
#include "lindmag/integrators.hpp"
#include "lindmag/models.hpp"
#include "lindmag/reference_solver.hpp"
#include "lindmag/statistics.hpp"
#include "lindmag/vqs.hpp"
#include "lindmag/wiener.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace lindmag;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kAlpha = 0.01;  // 99% confidence throughout

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  std::ostringstream s;
  s << std::setprecision(4) << x;
  return s.str();
}

SchemeConfig magnus(int order, Unraveling u, double delta, bool rkmk = false) {
  SchemeConfig c;
  c.order = order;
  c.unraveling = u;
  c.delta = delta;
  c.rkmk_correction = rkmk;
  return c;
}

SchemeConfig euler(double delta) {
  SchemeConfig c;
  c.method = Method::euler_maruyama;
  c.delta = delta;
  return c;
}

struct Run {
  EnsembleEstimate est;
  ErrorReport err;
};

Run run_against_exact(const LindbladModel& m, const SchemeConfig& cfg, int n_steps,
                      const std::vector<std::string>& obs, int n_traj, std::uint64_t seed, int repeats,
                      const EnsembleOptions& opt = {}) {
  const EnsembleEstimate est = run_ensemble(m, m.initial, cfg, n_steps, obs, n_traj, seed, repeats, opt);
  const ExactSeries ex = exact_series(m, m.initial.density_matrix(), cfg.delta, n_steps, obs);
  return {est, error_vs_exact(est, ex, obs)};
}

LindbladModel damped_qubit(double omega, double gamma) {
  LindbladModel m;
  m.name = "damped_qubit";
  m.hamiltonian = 0.5 * omega * pauli_matrix("X");
  ComplexMatrix lower = ComplexMatrix::Zero(2, 2);
  lower(0, 1) = 1.0;
  m.jump_ops = {std::sqrt(gamma) * lower};
  m.basis_labels = {"g", "e"};
  ComplexMatrix pe = ComplexMatrix::Zero(2, 2);
  pe(1, 1) = 1.0;
  m.observables = {{"excited", pe}};
  StateVector e = StateVector::Zero(2);
  e(1) = 1.0;
  m.initial = InitialEnsemble::pure(e);
  return m;
}

// Exact amplitude damping.
Outcome ac1() {
  const double gamma = 0.8;
  LindbladModel m = damped_qubit(0.0, gamma);
  m.hamiltonian.setZero();
  double worst = 0.0;
  for (double t : {0.5 / gamma, 1.0 / gamma, 2.0 / gamma}) {
    const DensityMatrix rho = propagate_exact(m, m.initial.density_matrix(), t);
    worst = std::max(worst, std::abs(rho(1, 1).real() - std::exp(-gamma * t)));
  }
  return {worst <= 1e-10, "max |p_e - exp(-gamma t)| = " + fmt(worst)};
}

// Brownian-bridge coefficient variances.
Outcome ac2() {
  const double delta = 0.25;
  const int p = 200;
  const long n = 1000000;
  double s2 = 0, s3 = 0, s4 = 0, m2 = 0, m3 = 0, m4 = 0;
  for (long k = 0; k < n; ++k) {
    CounterRng rng(20240104, static_cast<std::uint64_t>(k), 1, StreamPurpose::diagnostics);
    const StochasticIncrementSet inc = sample_increments_series(1, delta, p, 4, rng);
    m2 += inc.c2[0], m3 += inc.c3[0], m4 += inc.c4[0];
    s2 += inc.c2[0] * inc.c2[0], s3 += inc.c3[0] * inc.c3[0], s4 += inc.c4[0] * inc.c4[0];
  }
  const double dn = static_cast<double>(n);
  const double v2 = s2 / dn - (m2 / dn) * (m2 / dn), v3 = s3 / dn - (m3 / dn) * (m3 / dn),
               v4 = s4 / dn - (m4 / dn) * (m4 / dn);
  const double r2 = v2 / (std::pow(delta, 3) / 12.0) - 1.0, r3 = v3 / (std::pow(delta, 5) / 720.0) - 1.0,
               r4 = v4 / (std::pow(delta, 7) / 30240.0) - 1.0;
  const bool ok = std::abs(r2) <= 0.05 && std::abs(r3) <= 0.05 && std::abs(r4) <= 0.05;
  return {ok, "relative deviations II " + fmt(r2) + ", III " + fmt(r3) + ", IV " + fmt(r4)};
}

// TFIM: Scheme II beats Scheme I, nonlinear beats linear.
Outcome ac3() {
  const LindbladModel m = build_tfim(2, 1.0, 1.0, {0.1, 0.1});
  const std::vector<std::string> obs = {"p00", "p01", "p11"};
  std::map<std::string, std::vector<double>> e;
  std::ostringstream d;
  for (Unraveling u : {Unraveling::linear, Unraveling::nonlinear}) {
    for (int order : {1, 2}) {
      const SchemeConfig c = magnus(order, u, 0.25);
      const Run r = run_against_exact(m, c, 100, obs, 1000, 20240101, 10);
      e[c.label()] = r.err.repeat_errors;
      d << c.label() << " err " << fmt(r.err.mean) << " +- " << fmt(r.err.ci_halfwidth) << "; ";
    }
  }
  bool ok = true;
  auto test = [&](const std::string& a, const std::string& b) {
    const double p = stats::paired_less_pvalue(e.at(a), e.at(b));
    d << a << " < " << b << " p=" << fmt(p) << "; ";
    ok = ok && p < kAlpha;
  };
  test("Scheme II (linear)", "Scheme I (linear)");
  test("Scheme II (nonlinear)", "Scheme I (nonlinear)");
  test("Scheme I (nonlinear)", "Scheme I (linear)");
  test("Scheme II (nonlinear)", "Scheme II (linear)");
  return {ok, d.str()};
}

const std::vector<std::string> kFmoObs = {"p0", "p1", "p2", "p3", "p4"};

// FMO: nonlinear Scheme I beats linear and tracks the exact populations.
Outcome ac4() {
  const LindbladModel m = build_fmo();
  const Run lin = run_against_exact(m, magnus(1, Unraveling::linear, 5.0), 100, kFmoObs, 1000, 20240102, 10);
  const Run nl = run_against_exact(m, magnus(1, Unraveling::nonlinear, 5.0), 100, kFmoObs, 1000, 20240102, 10);
  const double p = stats::paired_less_pvalue(nl.err.repeat_errors, lin.err.repeat_errors);
  const ExactSeries ex = exact_series(m, m.initial.density_matrix(), 5.0, 100, kFmoObs);
  int inside = 0, total = 0;
  for (std::size_t o = 0; o < kFmoObs.size(); ++o) {
    const ObservableEstimate& est = nl.est.at(kFmoObs[o]);
    for (std::size_t n = 1; n < est.mean.size(); ++n, ++total) {
      inside += std::abs(est.mean[n] - ex.values[o][n]) <= 3.0 * est.pooled_se[n];
    }
  }
  const double frac = static_cast<double>(inside) / total;
  // Diagnostic only: the same count against each repeat's own standard error.
  int inside_r = 0, total_r = 0;
  for (std::size_t o = 0; o < kFmoObs.size(); ++o) {
    const ObservableEstimate& est = nl.est.at(kFmoObs[o]);
    for (std::size_t r = 0; r < est.repeat_means.size(); ++r)
      for (std::size_t n = 1; n < est.mean.size(); ++n, ++total_r)
        inside_r += std::abs(est.repeat_means[r][n] - ex.values[o][n]) <=
                    3.0 * std::sqrt(est.repeat_variances[r][n] / nl.est.n_traj);
  }
  return {p < kAlpha && frac >= 0.95,
          "nonlinear err " + fmt(nl.err.mean) + " vs linear " + fmt(lin.err.mean) + " p=" + fmt(p) +
              "; grand mean within 3 SE at " + fmt(100 * frac) + "% of points (per-repeat reading " +
              fmt(100.0 * inside_r / total_r) + "%)"};
}

// FMO: RKMK correction is not worse than the uncorrected nonlinear scheme.
Outcome ac5() {
  const LindbladModel m = build_fmo();
  const Run plain = run_against_exact(m, magnus(1, Unraveling::nonlinear, 5.0), 100, kFmoObs, 1000, 20240105, 10);
  const Run rk =
      run_against_exact(m, magnus(1, Unraveling::nonlinear, 5.0, true), 100, kFmoObs, 1000, 20240105, 10);
  // Fails only if the uncorrected error is significantly smaller.
  const double p_worse = stats::paired_less_pvalue(plain.err.repeat_errors, rk.err.repeat_errors);
  const double p_better = stats::paired_less_pvalue(rk.err.repeat_errors, plain.err.repeat_errors);
  return {p_worse >= kAlpha, "rkmk err " + fmt(rk.err.mean) + " vs plain " + fmt(plain.err.mean) +
                                 "; p(plain < rkmk)=" + fmt(p_worse) + ", p(rkmk < plain)=" + fmt(p_better)};
}

const std::vector<std::string> kYields = {"singlet_yield", "triplet_yield"};

// RPM: errors non-increasing from Scheme I to IV.
Outcome ac6() {
  bool ok = true;
  std::ostringstream d;
  for (double theta : {0.0, kPi / 2.0}) {
    RpmParameters rp;
    rp.theta = theta;
    const LindbladModel m = build_rpm(rp);
    const ExactSeries ex = exact_series(m, m.initial.density_matrix(), 1e-7, 500, kYields);
    std::vector<EnsembleEstimate> runs;
    for (int order = 1; order <= 4; ++order) {
      runs.push_back(run_ensemble(m, m.initial, magnus(order, Unraveling::linear, 1e-7), 500, kYields, 1000,
                                  20240103, 10));
    }
    for (const auto& y : kYields) {
      std::vector<ErrorReport> rep;
      for (const auto& r : runs) rep.push_back(error_vs_exact(r, ex, {y}));
      d << "theta=" << fmt(theta) << " " << y << " errs";
      for (std::size_t k = 0; k < rep.size(); ++k) {
        d << " " << fmt(rep[k].mean);
        if (k > 0 && rep[k].mean > rep[k - 1].mean) ok = false;
      }
      const double p = stats::paired_less_pvalue(rep[3].repeat_errors, rep[0].repeat_errors);
      d << " p(IV<I)=" << fmt(p) << "; ";
      ok = ok && p < kAlpha;
    }
  }
  return {ok, d.str()};
}

// RPM: Scheme IV singlet yield against the exact steady state at each angle.
Outcome ac7() {
  bool ok = true;
  std::ostringstream d;
  for (int deg = 0; deg <= 90; deg += 10) {
    RpmParameters rp;
    rp.theta = deg * kPi / 180.0;
    const LindbladModel m = build_rpm(rp);
    const DensityMatrix rho0 = m.initial.density_matrix();
    const EnsembleEstimate est =
        run_ensemble(m, m.initial, magnus(4, Unraveling::linear, 1e-7), 500, {"singlet_yield"}, 1000, 20240103, 10);
    const ObservableEstimate& y = est.at("singlet_yield");
    const SteadyStateResult ss = steady_state(m, rho0, 20.0 / rp.decay_rate);
    const double target = (ss.rho * m.observable("singlet_yield")).trace().real();
    const double at_t = (propagate_exact(m, rho0, 50e-6) * m.observable("singlet_yield")).trace().real();
    const bool inside = !ss.residual_warning && std::abs(y.mean.back() - target) <= y.ci_halfwidth.back();
    ok = ok && inside;
    d << deg << "deg: " << fmt(y.mean.back()) << " +- " << fmt(y.ci_halfwidth.back()) << " vs steady "
      << fmt(target) << " (exact at T " << fmt(at_t) << ")" << (inside ? "" : " OUT") << "; ";
  }
  return {ok, d.str()};
}

// TFIM linear: Euler-Maruyama against Scheme I.
Outcome ac8() {
  const LindbladModel m = build_tfim(2, 1.0, 1.0, {0.1, 0.1});
  const std::vector<std::string> obs = {"p00", "p01", "p11"};
  EnsembleOptions lenient;
  lenient.throw_on_failure = false;
  const Run magnus1 = run_against_exact(m, magnus(1, Unraveling::linear, 0.25), 100, obs, 1000, 20240106, 10);
  const Run em_coarse = run_against_exact(m, euler(0.25), 100, obs, 1000, 20240106, 10, lenient);
  const Run em_fine = run_against_exact(m, euler(2.5e-3), 10000, obs, 1000, 20240107, 10, lenient);
  const bool coarse_aborted = em_coarse.est.failed;
  const bool coarse_ok = coarse_aborted || em_coarse.err.mean >= 10.0 * magnus1.err.mean;
  const double p = em_fine.est.failed
                       ? 1.0
                       : stats::welch_less_pvalue(magnus1.err.repeat_errors, em_fine.err.repeat_errors);
  std::ostringstream d;
  d << "Scheme I err " << fmt(magnus1.err.mean) << "; EM 0.25 "
    << (coarse_aborted ? "aborted (" + std::to_string(em_coarse.est.aborted) + " trajectories)"
                       : "err " + fmt(em_coarse.err.mean))
    << "; EM 2.5e-3 err " << fmt(em_fine.err.mean) << " p(Scheme I < EM)=" << fmt(p);
  return {coarse_ok && p < kAlpha, d.str()};
}

// Euler-Maruyama weak order one on a driven, damped qubit.
Outcome ac9() {
  const LindbladModel m = damped_qubit(3.0, 0.5);
  const WeakOrderResult r =
      estimate_weak_order(m, euler(0.1), {1e-1, 3e-2, 1e-2, 3e-3}, 20000, "excited", 1.5, 20240108, 10);
  std::ostringstream d;
  d << "slope " << fmt(r.slope) << " +- " << fmt(r.slope_ci) << (r.inconclusive ? " (noise floor)" : "")
    << "; errors";
  for (const auto& pt : r.points) d << " " << fmt(pt.error) << "/" << fmt(pt.se);
  return {!r.inconclusive && std::abs(r.slope - 1.0) <= 0.2, d.str()};
}

// VQS against direct propagation on identical increments.
Outcome ac10() {
  const LindbladModel tfim = build_tfim(2, 1.0, 1.0, {0.1, 0.1});
  const LindbladModel fmo = build_fmo();
  HvaAnsatz fmo_ansatz = full_pauli_ansatz(3);
  fmo_ansatz.fixed_gates = {{GateKind::x, 2, -1, 0}};  // |001> = site 1
  struct Case {
    const LindbladModel* model;
    const HvaAnsatz ansatz;
    double delta;
    std::vector<std::string> obs;
  };
  const std::vector<Case> cases = {{&tfim, tfim_hva(3), 0.25, {"p00", "p01", "p10", "p11"}},
                                   {&fmo, fmo_ansatz, 5.0, kFmoObs}};
  double worst = 0.0;
  std::ostringstream d;
  for (const Case& c : cases) {
    for (Unraveling u : {Unraveling::linear, Unraveling::nonlinear}) {
      const SchemeConfig cfg = magnus(1, u, c.delta);
      const std::vector<double> theta0(static_cast<std::size_t>(c.ansatz.parameter_count()), 0.0);
      const VqsSeries v = vqs_trajectory(*c.model, cfg, c.ansatz, theta0, 100, c.obs, {20240109, 0});
      const TrajectorySeries ref =
          run_trajectory(*c.model, c.model->initial.components.front().psi, cfg, 100, c.obs, {20240109, 0});
      double gap = 0.0;
      for (std::size_t o = 0; o < c.obs.size(); ++o)
        for (std::size_t n = 0; n < ref.times.size(); ++n)
          gap = std::max(gap, std::abs(v.series.values[o][n] - ref.values[o][n]));
      worst = std::max(worst, gap);
      d << c.model->name << " " << to_string(u) << " gap " << fmt(gap) << "; ";
    }
  }
  return {worst <= 1e-2, d.str()};
}

// Invariant suite.
Outcome ac11() {
  std::vector<std::string> failed;
  auto check = [&](bool cond, const std::string& what) {
    if (!cond) failed.push_back(what);
  };
  const LindbladModel tfim = build_tfim(2, 1.0, 1.0, {0.1, 0.1});
  const LindbladModel fmo = build_fmo();
  const LindbladModel rpm = build_rpm({});

  // Nonlinear steps keep unit norm.
  double norm_dev = 0.0;
  for (const LindbladModel* m : {&tfim, &fmo}) {
    for (int order = 1; order <= 3; ++order) {
      const double delta = m == &tfim ? 0.25 : 5.0;
      const StepEngine engine(*m, magnus(order, Unraveling::nonlinear, delta));
      StateVector psi = m->initial.components.front().psi;
      for (int n = 1; n <= 100; ++n) {
        CounterRng rng(11, 0, static_cast<std::uint64_t>(n));
        psi = engine.step(psi, engine.sample(rng));
        norm_dev = std::max(norm_dev, std::abs(psi.norm() - 1.0));
      }
    }
  }
  check(norm_dev <= 1e-12, "nonlinear norm " + fmt(norm_dev));

  // Metric diagonal, symmetry and positivity.
  const HvaAnsatz hva = tfim_hva(3);
  std::vector<double> theta(21);
  for (std::size_t k = 0; k < theta.size(); ++k) theta[k] = std::sin(1.7 * k + 0.3) * 2.0;
  const MvSystem mv = assemble_m_v(hva, theta, tfim.generator_hamiltonian());
  double diag_dev = 0.0;
  for (Eigen::Index i = 0; i < mv.m.rows(); ++i) diag_dev = std::max(diag_dev, std::abs(mv.m(i, i) - 0.25));
  check(diag_dev <= 1e-14, "M_ii " + fmt(diag_dev));
  check((mv.m - mv.m.transpose()).cwiseAbs().maxCoeff() == 0.0, "M symmetry");
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(mv.m);
  check(es.eigenvalues().minCoeff() >= -1e-10, "M PSD " + fmt(es.eigenvalues().minCoeff()));

  // Levy-area antisymmetry.
  bool antisym = true;
  for (int s = 1; s <= 200; ++s) {
    CounterRng rng(12, 0, static_cast<std::uint64_t>(s));
    const StochasticIncrementSet inc = sample_increments_series(4, 0.25, 200, 2, rng);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) antisym = antisym && inc.levy_at(i, j) == -inc.levy_at(j, i);
  }
  check(antisym, "Levy antisymmetry");

  // Commuting generators collapse Scheme II onto Scheme I.
  ComplexMatrix g0 = ComplexMatrix::Zero(3, 3), g1 = ComplexMatrix::Zero(3, 3), g2 = ComplexMatrix::Zero(3, 3);
  g0.diagonal() << Complex(-0.1, 0.3), Complex(-0.2, -0.1), Complex(0.05, 0.7);
  g1.diagonal() << 0.2, 0.5, -0.3;
  g2.diagonal() << Complex(0.0, 0.4), 0.1, 0.2;
  double collapse = 0.0;
  for (int s = 1; s <= 50; ++s) {
    CounterRng rng(13, 0, static_cast<std::uint64_t>(s));
    const StochasticIncrementSet inc = sample_increments(2, 0.25, 200, 2, rng);
    const ComplexMatrix o1 = magnus_omega(g0, {g1, g2}, inc, 1).omega;
    const ComplexMatrix o2 = magnus_omega(g0, {g1, g2}, inc, 2).omega;
    collapse = std::max(collapse, (o2 - o1).norm() / o1.norm());
  }
  check(collapse <= 1e-14, "commuting collapse " + fmt(collapse));

  // Exact propagation preserves trace.
  double trace_dev = 0.0;
  for (const auto& [m, t] : std::vector<std::pair<const LindbladModel*, double>>{
           {&tfim, 25.0}, {&fmo, 500.0}, {&rpm, 50e-6}}) {
    trace_dev = std::max(trace_dev, std::abs(propagate_exact(*m, m->initial.density_matrix(), t).trace() - 1.0));
  }
  check(trace_dev <= 1e-10, "trace " + fmt(trace_dev));

  // Results do not depend on the thread count.
  bool reproducible = true;
  for (Unraveling u : {Unraveling::linear, Unraveling::nonlinear}) {
    std::vector<EnsembleEstimate> runs;
    for (int threads : {0, 1, 2, 4}) {
      EnsembleOptions o;
      o.serial = threads == 0;
      o.threads = threads;
      runs.push_back(run_ensemble(tfim, tfim.initial, magnus(2, u, 0.25), 40, {"p00", "p11"}, 300, 14, 2, o));
    }
    for (const auto& r : runs)
      for (std::size_t o = 0; o < r.observables.size(); ++o)
        reproducible = reproducible && r.observables[o].mean == runs[0].observables[o].mean &&
                       r.observables[o].repeat_variances == runs[0].observables[o].repeat_variances;
  }
  check(reproducible, "thread reproducibility");

  std::string d = failed.empty() ? "all invariants hold" : "violated:";
  for (const auto& f : failed) d += " " + f + ";";
  return {failed.empty(), d};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lindmag acceptance criteria"};
  std::vector<std::string> only;
  app.add_option("--only", only, "run only these criteria (AC1..AC11)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> all = {
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5}, {"AC6", ac6},
      {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10}, {"AC11", ac11}};
  for (const auto& name : only) {
    if (std::none_of(all.begin(), all.end(), [&](const auto& a) { return a.first == name; })) {
      std::cerr << "unknown criterion " << name << "\n";
      return 2;
    }
  }
  bool all_pass = true;
  for (const auto& [name, fn] : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all_pass = all_pass && r.pass;
    std::cout << name << (r.pass ? " PASS" : " FAIL") << "  [" << fmt(secs) << " s] " << r.detail << std::endl;
  }
  return all_pass ? 0 : 1;
}
