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

#include "lindmag/integrators.hpp"

#include <cmath>
#include <sstream>

namespace lindmag {

namespace {

// Treats a nested commutator as zero when it is at rounding level of its factors.
bool negligible(const ComplexMatrix& c, double scale) {
  return c.norm() <= 1e-13 * std::max(scale, 1e-300);
}

double fro(const ComplexMatrix& a) { return a.norm(); }

const char* roman(int order) {
  static const char* names[] = {"?", "I", "II", "III", "IV"};
  return (order >= 1 && order <= 4) ? names[order] : names[0];
}

}  // namespace

std::string to_string(Unraveling u) { return u == Unraveling::linear ? "linear" : "nonlinear"; }
std::string to_string(Method m) { return m == Method::magnus ? "magnus" : "euler_maruyama"; }

void SchemeConfig::validate() const {
  if (order < 1 || order > 4) throw std::invalid_argument("scheme: order must be 1..4");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("scheme: delta must be > 0");
  if (rkmk_correction && unraveling != Unraveling::nonlinear) {
    throw std::invalid_argument("scheme: rkmk correction requires the nonlinear unraveling");
  }
  if (method == Method::euler_maruyama && unraveling != Unraveling::linear) {
    throw std::invalid_argument("scheme: Euler-Maruyama is defined for the linear unraveling only");
  }
  if (method == Method::euler_maruyama && rkmk_correction) {
    throw std::invalid_argument("scheme: rkmk correction applies to Magnus schemes only");
  }
  if (fourier_p < 1) throw std::invalid_argument("scheme: fourier_p must be >= 1");
}

std::string SchemeConfig::label() const {
  std::ostringstream s;
  if (method == Method::euler_maruyama) {
    s << "EM";
  } else {
    s << "Scheme " << roman(order);
  }
  s << " (" << to_string(unraveling) << (rkmk_correction ? ", rkmk" : "") << ")";
  return s.str();
}

ComplexMatrix drift_linear(const LindbladModel& model) {
  ComplexMatrix g0 = -kI * model.generator_hamiltonian();
  for (const auto& l : model.jump_ops) g0 -= 0.5 * (l + l.adjoint()) * l;
  return g0;
}

ComplexMatrix drift_nonlinear(const LindbladModel& model, const StateVector& psi) {
  if (psi.size() != model.dim()) throw DimensionError("drift_nonlinear: dimension mismatch");
  if (std::abs(psi.norm() - 1.0) > 1e-8) {
    throw std::invalid_argument("drift_nonlinear: psi must be normalized");
  }
  ComplexMatrix g0 = drift_linear(model);
  for (const auto& l : model.jump_ops) {
    const double re = psi.dot(l * psi).real();
    g0 += 2.0 * re * l;
  }
  return g0;
}

ComplexMatrix ito_drift(const LindbladModel& model) {
  ComplexMatrix g = -kI * model.generator_hamiltonian();
  for (const auto& l : model.jump_ops) g -= 0.5 * l.adjoint() * l;
  return g;
}

SamplerNeeds NoiseStructure::needs(int order) const {
  SamplerNeeds n;
  n.levy_area = order >= 2 && !noise_commute;
  n.quadratic = order >= 3 && same_channel_nested;
  return n;
}

NoiseStructure analyze_structure(const ComplexMatrix& g0, const std::vector<ComplexMatrix>& gs) {
  NoiseStructure s;
  const double n0 = fro(g0);
  for (std::size_t m = 0; m < gs.size(); ++m) {
    const double nm = fro(gs[m]);
    const ComplexMatrix mg0 = commutator(gs[m], g0);
    if (!negligible(commutator(gs[m], mg0), nm * nm * n0)) s.same_channel_nested = true;
    const ComplexMatrix mg0g0 = commutator(mg0, g0);
    for (std::size_t k = 0; k < gs.size(); ++k) {
      const double nk = fro(gs[k]);
      const ComplexMatrix mk = commutator(gs[m], gs[k]);
      if (k != m && !negligible(mk, nm * nk)) {
        s.noise_commute = false;
        s.simplified_order4 = false;
      }
      // The nonlinear drift adds multiples of G_k to G0.
      if (!negligible(commutator(gs[m], mk), nm * nm * nk)) s.same_channel_nested = true;
      if (!negligible(commutator(mg0, gs[k]), nm * n0 * nk) ||
          !negligible(commutator(mg0g0, gs[k]), nm * n0 * n0 * nk)) {
        s.simplified_order4 = false;
      }
    }
  }
  return s;
}

int effective_order(int requested, const NoiseStructure& s, Order4Policy policy) {
  if (requested < 4 || s.simplified_order4) return requested;
  if (policy == Order4Policy::error) {
    throw StructureError(
        "Scheme IV needs [G_m,G_n] = [[G_m,G0],G_n] = [[[G_m,G0],G0],G_n] = 0 for all noise pairs");
  }
  return 3;
}

MagnusTermSet::MagnusTermSet(const ComplexMatrix& g0, const std::vector<ComplexMatrix>& gs,
                             int order, const NoiseStructure& structure)
    : order_(order) {
  if (order < 1 || order > 4) throw std::invalid_argument("MagnusTermSet: order must be 1..4");
  if (order == 4 && !structure.simplified_order4) {
    throw StructureError("MagnusTermSet: Scheme IV requires the commuting structure");
  }
  const int d = static_cast<int>(gs.size());
  for (const auto& g : gs) {
    if (g.rows() != g0.rows() || g.cols() != g0.cols()) {
      throw DimensionError("magnus: generator dimension mismatch");
    }
  }
  auto add = [&](Kind kind, int i, int j, int k, ComplexMatrix m, double scale) {
    if (negligible(m, scale)) return false;
    terms_.push_back({kind, i, j, k, std::move(m)});
    return true;
  };
  const double n0 = fro(g0);
  std::vector<double> nrm(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) nrm[j] = fro(gs[j]);

  terms_.push_back({Kind::drift, 0, 0, 0, g0});
  for (int j = 0; j < d; ++j) terms_.push_back({Kind::noise, 0, j, 0, gs[j]});
  if (order >= 2) {
    for (int j = 0; j < d; ++j) add(Kind::drift_noise, 0, j, 0, commutator(g0, gs[j]), n0 * nrm[j]);
    for (int i = 0; i < d; ++i) {
      for (int j = i + 1; j < d; ++j) {
        add(Kind::levy, i, j, 0, commutator(gs[i], gs[j]), nrm[i] * nrm[j]);
      }
    }
  }
  if (order >= 3) {
    for (int j = 0; j < d; ++j) {
      const ComplexMatrix gj_g0 = commutator(gs[j], g0);
      add(Kind::c3, 0, j, 0, commutator(g0, gj_g0), n0 * n0 * nrm[j]);
      for (int i = 0; i < d; ++i) {
        const double scale = nrm[i] * nrm[j] * n0;
        if (i == j) {
          add(Kind::same_channel, i, j, 0, commutator(gs[i], gj_g0), scale);
        } else if (add(Kind::mixed_w_a0, i, j, 0, commutator(gs[i], gj_g0), scale)) {
          ++omitted_;
        }
      }
    }
    for (int k = 0; k < d; ++k) {
      for (int j = k + 1; j < d; ++j) {
        const ComplexMatrix gj_gk = commutator(gs[j], gs[k]);
        if (negligible(gj_gk, nrm[j] * nrm[k])) continue;
        // i = -1 stands for G0.
        if (add(Kind::mixed_pure, -1, j, k, commutator(g0, gj_gk), n0 * nrm[j] * nrm[k])) ++omitted_;
        for (int i = 0; i < d; ++i) {
          if (add(Kind::mixed_pure, i, j, k, commutator(gs[i], gj_gk), nrm[i] * nrm[j] * nrm[k])) {
            ++omitted_;
          }
        }
      }
    }
  }
  if (order >= 4) {
    for (int m = 0; m < d; ++m) {
      const ComplexMatrix c3 = commutator(commutator(commutator(gs[m], g0), g0), g0);
      add(Kind::quartic, 0, m, 0, c3, nrm[m] * n0 * n0 * n0);
    }
  }
}

double MagnusTermSet::coefficient(const Term& t, const StochasticIncrementSet& inc) const {
  const double delta = inc.delta;
  switch (t.kind) {
    case Kind::drift:
      return delta;
    case Kind::noise:
      return inc.w[t.j];
    case Kind::drift_noise:
      return inc.c2[t.j];
    case Kind::levy:
      if (!inc.has_levy) throw std::logic_error("magnus: increments lack the Levy area");
      return inc.levy_at(t.i, t.j);
    case Kind::c3:
      return inc.c3[t.j];
    case Kind::same_channel:
      if (!inc.has_quadratic) throw std::logic_error("magnus: increments lack the quadratic path integral");
      return inc.same_channel_triple(t.j) / 3.0 + inc.w[t.j] * delta * inc.a0[t.j] / 12.0;
    case Kind::mixed_w_a0:
      return inc.w[t.i] * delta * inc.a0[t.j] / 12.0;
    case Kind::mixed_pure: {
      if (!inc.has_levy) throw std::logic_error("magnus: increments lack the Levy area");
      const double ji = t.i < 0 ? delta : inc.w[t.i];
      return ji * 2.0 * inc.levy_at(t.k, t.j) / 12.0;
    }
    case Kind::quartic:
      return inc.c4[t.j];
  }
  return 0.0;
}

ComplexMatrix MagnusTermSet::assemble(const StochasticIncrementSet& inc) const {
  if (inc.order < order_) throw std::invalid_argument("magnus: increments sampled at lower order");
  ComplexMatrix omega = ComplexMatrix::Zero(terms_.front().m.rows(), terms_.front().m.cols());
  for (const auto& t : terms_) {
    const double c = coefficient(t, inc);
    if (c != 0.0) omega.noalias() += c * t.m;
  }
  return omega;
}

double radius_proxy(double delta, double g0_norm, const std::vector<double>& g_norms,
                    const StochasticIncrementSet& inc) {
  double r = delta * g0_norm;
  for (std::size_t j = 0; j < g_norms.size(); ++j) r += std::abs(inc.w[j]) * g_norms[j];
  return r;
}

MagnusOperator magnus_omega(const ComplexMatrix& g0, const std::vector<ComplexMatrix>& gs,
                            const StochasticIncrementSet& inc, int order, Order4Policy policy) {
  if (static_cast<int>(gs.size()) != inc.d) throw DimensionError("magnus_omega: channel count mismatch");
  if (inc.order < order) throw std::invalid_argument("magnus_omega: increments sampled at lower order");
  const NoiseStructure s = analyze_structure(g0, gs);
  MagnusOperator out;
  out.order = effective_order(order, s, policy);
  out.downgraded = out.order < order;
  const MagnusTermSet terms(g0, gs, out.order, s);
  out.omega = terms.assemble(inc);
  out.omitted_terms = terms.omitted_terms();
  std::vector<double> norms;
  for (const auto& g : gs) norms.push_back(spectral_norm(g));
  out.radius_proxy = radius_proxy(inc.delta, spectral_norm(g0), norms, inc);
  if (!all_finite(out.omega)) throw NumericalError("magnus_omega: non-finite operator");
  return out;
}

StepEngine::StepEngine(const LindbladModel& model, const SchemeConfig& cfg)
    : model_(model), cfg_(cfg) {
  cfg_.validate();
  model_.validate();
  g0_linear_ = drift_linear(model_);
  ito_drift_ = ito_drift(model_);
  g0_linear_norm_ = spectral_norm(g0_linear_);
  for (const auto& l : model_.jump_ops) noise_norms_.push_back(spectral_norm(l));
  structure_ = analyze_structure(g0_linear_, model_.jump_ops);
  if (cfg_.method == Method::magnus) {
    effective_order_ = lindmag::effective_order(cfg_.order, structure_, cfg_.order4_policy);
    MagnusTermSet terms(g0_linear_, model_.jump_ops, effective_order_, structure_);
    omitted_ = terms.omitted_terms();
    if (cfg_.unraveling == Unraveling::linear) linear_terms_.emplace(std::move(terms));
  }
}

int StepEngine::sample_order() const {
  return cfg_.method == Method::euler_maruyama ? 1 : effective_order_;
}

StochasticIncrementSet StepEngine::sample(CounterRng& rng) const {
  const int order = sample_order();
  return sample_increments(noise_count(), cfg_.delta, cfg_.fourier_p, order, rng,
                           structure_.needs(order));
}

MagnusOperator StepEngine::omega(const StateVector& psi, const StochasticIncrementSet& inc) const {
  if (cfg_.method != Method::magnus) throw std::logic_error("StepEngine::omega: not a Magnus scheme");
  MagnusOperator out;
  out.order = effective_order_;
  out.downgraded = downgraded();
  out.omitted_terms = omitted_;
  if (linear_terms_) {
    out.omega = linear_terms_->assemble(inc);
    out.radius_proxy = radius_proxy(inc.delta, g0_linear_norm_, noise_norms_, inc);
  } else {
    const ComplexMatrix g0 = drift_nonlinear(model_, psi);
    const MagnusTermSet terms(g0, model_.jump_ops, effective_order_, structure_);
    out.omega = terms.assemble(inc);
    out.radius_proxy = cfg_.radius_check
                           ? radius_proxy(inc.delta, spectral_norm(g0), noise_norms_, inc)
                           : 0.0;
  }
  return out;
}

StateVector StepEngine::step(const StateVector& psi, const StochasticIncrementSet& inc,
                             StepReport* report) const {
  if (psi.size() != model_.dim()) throw DimensionError("step: state dimension mismatch");
  if (inc.d != noise_count() || inc.delta != cfg_.delta) {
    throw std::invalid_argument("step: increments do not match the scheme");
  }
  if (cfg_.method == Method::euler_maruyama) {
    StateVector out = psi + cfg_.delta * (ito_drift_ * psi);
    for (int k = 0; k < noise_count(); ++k) out += inc.w[k] * (model_.jump_ops[k] * psi);
    if (!all_finite(out)) throw NumericalError("step_em: non-finite state");
    return out;
  }
  if (cfg_.unraveling == Unraveling::linear) {
    const MagnusOperator op = omega(psi, inc);
    if (report) {
      report->radius_proxy = op.radius_proxy;
      report->radius_violation = cfg_.radius_check && radius_exceeded(op.radius_proxy);
    }
    StateVector out = expm_action(op.omega, psi);
    if (!all_finite(out)) throw NumericalError("step_magnus: non-finite state");
    return out;
  }
  double first_proxy = 0.0;
  auto omega_of = [&](const StateVector& y) {
    const MagnusOperator op = omega(y, inc);
    if (first_proxy == 0.0) first_proxy = op.radius_proxy;
    return op.omega;
  };
  StateVector out;
  if (cfg_.rkmk_correction) {
    out = rkmk_heun(omega_of, psi, true);
  } else {
    out = expm_action(omega_of(psi), psi);
    const double n = out.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw NumericalError("step_magnus: zero or non-finite norm");
    out /= n;
  }
  if (!all_finite(out)) throw NumericalError("step_magnus: non-finite state");
  if (report) {
    report->radius_proxy = first_proxy;
    report->radius_violation = cfg_.radius_check && radius_exceeded(first_proxy);
  }
  return out;
}

StateVector rkmk_heun(const std::function<ComplexMatrix(const StateVector&)>& omega_of,
                      const StateVector& y0, bool normalize) {
  auto finish = [&](StateVector v) {
    if (normalize) {
      const double n = v.norm();
      if (!(n > 0.0) || !std::isfinite(n)) throw NumericalError("rkmk: zero or non-finite norm");
      v /= n;
    }
    return v;
  };
  const ComplexMatrix omega1 = omega_of(y0);
  const StateVector predictor = finish(expm_action(omega1, y0));
  const ComplexMatrix omega2 = omega_of(predictor);
  return finish(expm_action(0.5 * (omega1 + omega2), y0));
}

StateVector step_em(const StateVector& psi, const LindbladModel& model, double delta,
                    const StochasticIncrementSet& inc) {
  SchemeConfig cfg;
  cfg.method = Method::euler_maruyama;
  cfg.delta = delta;
  return StepEngine(model, cfg).step(psi, inc);
}

StateVector step_magnus(const StateVector& psi, const LindbladModel& model,
                        const SchemeConfig& cfg, const StochasticIncrementSet& inc,
                        StepReport* report) {
  SchemeConfig c = cfg;
  c.method = Method::magnus;
  c.rkmk_correction = false;
  return StepEngine(model, c).step(psi, inc, report);
}

StateVector step_rkmk(const StateVector& psi, const LindbladModel& model, const SchemeConfig& cfg,
                      const StochasticIncrementSet& inc, StepReport* report) {
  SchemeConfig c = cfg;
  c.method = Method::magnus;
  c.rkmk_correction = true;
  if (c.unraveling != Unraveling::nonlinear) {
    throw std::invalid_argument("step_rkmk: requires the nonlinear unraveling");
  }
  return StepEngine(model, c).step(psi, inc, report);
}

}  // namespace lindmag
