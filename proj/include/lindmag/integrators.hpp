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
#include "lindmag/wiener.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lindmag {

enum class Unraveling { linear, nonlinear };
enum class Method { magnus, euler_maruyama };
// What to do when Scheme IV is requested without the commuting structure it needs.
enum class Order4Policy { downgrade, error };

struct SchemeConfig {
  Method method = Method::magnus;
  int order = 1;
  Unraveling unraveling = Unraveling::linear;
  bool rkmk_correction = false;
  double delta = 0.0;
  bool radius_check = true;
  int fourier_p = kDefaultFourierOrder;
  Order4Policy order4_policy = Order4Policy::downgrade;

  // rkmk implies nonlinear; Euler-Maruyama implies linear; order in 1..4; delta > 0.
  void validate() const;
  std::string label() const;
};

std::string to_string(Unraveling u);
std::string to_string(Method m);

class StructureError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct MagnusOperator {
  ComplexMatrix omega;
  int order = 1;
  double radius_proxy = 0.0;
  // Terms whose third-order triple-integral part was not sampled.
  int omitted_terms = 0;
  bool downgraded = false;
};

// Stratonovich drift -iH - (1/2) sum (L + L^dag) L.
ComplexMatrix drift_linear(const LindbladModel& model);
// Adds sum 2 Re<L_k> L_k with <L_k> frozen at psi; psi must be unit norm within 1e-8.
ComplexMatrix drift_nonlinear(const LindbladModel& model, const StateVector& psi);
// Ito drift -iH_eff = -iH - (1/2) sum L^dag L.
ComplexMatrix ito_drift(const LindbladModel& model);

// Commutator structure of (G0, G_1..G_d) used to pick sampled integrals and Scheme IV form.
struct NoiseStructure {
  bool noise_commute = true;      // [G_i, G_j] = 0 for i, j >= 1
  bool same_channel_nested = false;  // some [G_j, [G_j, G0]] != 0
  bool simplified_order4 = true;  // [G_m,G_n] = [[G_m,G0],G_n] = [[[G_m,G0],G0],G_n] = 0
  SamplerNeeds needs(int order) const;
};

NoiseStructure analyze_structure(const ComplexMatrix& g0, const std::vector<ComplexMatrix>& gs);

// Order actually assembled given the structure and policy. Throws StructureError on policy error.
int effective_order(int requested, const NoiseStructure& s, Order4Policy policy);

// Precomputed nested commutators for fixed generators; coefficients come from the increments.
class MagnusTermSet {
 public:
  MagnusTermSet(const ComplexMatrix& g0, const std::vector<ComplexMatrix>& gs, int order,
                const NoiseStructure& structure);

  ComplexMatrix assemble(const StochasticIncrementSet& inc) const;
  int order() const { return order_; }
  int omitted_terms() const { return omitted_; }
  std::size_t size() const { return terms_.size(); }

 private:
  enum class Kind { drift, noise, drift_noise, levy, c3, same_channel, mixed_w_a0, mixed_pure,
                    quartic };
  struct Term {
    Kind kind;
    int i = 0, j = 0, k = 0;
    ComplexMatrix m;
  };
  double coefficient(const Term& t, const StochasticIncrementSet& inc) const;

  int order_ = 1;
  int omitted_ = 0;
  std::vector<Term> terms_;
};

MagnusOperator magnus_omega(const ComplexMatrix& g0, const std::vector<ComplexMatrix>& gs,
                            const StochasticIncrementSet& inc, int order,
                            Order4Policy policy = Order4Policy::downgrade);

double radius_proxy(double delta, double g0_norm, const std::vector<double>& g_norms,
                    const StochasticIncrementSet& inc);
inline bool radius_exceeded(double proxy) { return proxy >= 3.14159265358979323846; }

struct StepReport {
  double radius_proxy = 0.0;
  bool radius_violation = false;
};

// Per-model, per-config stepping with cached generators. Immutable after construction.
class StepEngine {
 public:
  StepEngine(const LindbladModel& model, const SchemeConfig& cfg);

  const SchemeConfig& config() const { return cfg_; }
  const LindbladModel& model() const { return model_; }
  int effective_order() const { return effective_order_; }
  bool downgraded() const { return effective_order_ < cfg_.order && cfg_.method == Method::magnus; }
  int omitted_terms() const { return omitted_; }
  const NoiseStructure& structure() const { return structure_; }
  int noise_count() const { return static_cast<int>(model_.jump_ops.size()); }
  int sample_order() const;

  StochasticIncrementSet sample(CounterRng& rng) const;
  MagnusOperator omega(const StateVector& psi, const StochasticIncrementSet& inc) const;
  StateVector step(const StateVector& psi, const StochasticIncrementSet& inc,
                   StepReport* report = nullptr) const;

 private:
  LindbladModel model_;
  SchemeConfig cfg_;
  ComplexMatrix g0_linear_;
  ComplexMatrix ito_drift_;
  std::vector<double> noise_norms_;
  double g0_linear_norm_ = 0.0;
  NoiseStructure structure_;
  int effective_order_ = 1;
  int omitted_ = 0;
  std::optional<MagnusTermSet> linear_terms_;
};

StateVector step_em(const StateVector& psi, const LindbladModel& model, double delta,
                    const StochasticIncrementSet& inc);
StateVector step_magnus(const StateVector& psi, const LindbladModel& model,
                        const SchemeConfig& cfg, const StochasticIncrementSet& inc,
                        StepReport* report = nullptr);
StateVector step_rkmk(const StateVector& psi, const LindbladModel& model, const SchemeConfig& cfg,
                      const StochasticIncrementSet& inc, StepReport* report = nullptr);

// Heun on the Lie algebra: Omega~ = (Omega(y0) + Omega(e^{Omega(y0)} y0)) / 2.
StateVector rkmk_heun(const std::function<ComplexMatrix(const StateVector&)>& omega_of,
                      const StateVector& y0, bool normalize);

}  // namespace lindmag
