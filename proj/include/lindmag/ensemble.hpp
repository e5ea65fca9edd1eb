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

#include "lindmag/integrators.hpp"
#include "lindmag/reference_solver.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lindmag {

struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t trajectory = 0;
};

struct TrajectoryState {
  StateVector psi;
  double weight = 1.0;  // |psi|^2 for linear, 1 for nonlinear
  int step = 0;
  StreamKey key;
};

struct TrajectorySeries {
  std::vector<double> times;
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;  // values[o][n]
  std::vector<double> weights;              // |psi_n|^2
  bool ok = true;
  std::string diagnostic;
  int radius_violations = 0;
};

TrajectorySeries run_trajectory(const LindbladModel& model, const StateVector& psi0,
                                const SchemeConfig& cfg, int n_steps,
                                const std::vector<std::string>& observables, StreamKey key);
TrajectorySeries run_trajectory(const StepEngine& engine, const StateVector& psi0, int n_steps,
                                const std::vector<std::string>& observables, StreamKey key);

struct EnsembleOptions {
  int threads = 0;          // 0: OpenMP default
  bool serial = false;      // reference loop without OpenMP
  int chunk_size = 64;      // trajectories per reduction chunk
  double max_abort_fraction = 0.01;
  bool throw_on_failure = true;
  bool final_only = false;  // record t = 0 and the final step only
};

struct ObservableEstimate {
  std::string name;
  std::vector<double> mean;          // grand mean over repeats
  std::vector<double> ci_halfwidth;  // 99% Student-t over repeat means
  std::vector<double> pooled_se;     // trajectory-level standard error of the grand mean
  std::vector<std::vector<double>> repeat_means;      // [r][n]
  std::vector<std::vector<double>> repeat_variances;  // trajectory variance [r][n]
};

struct EnsembleEstimate {
  std::vector<double> times;
  std::vector<ObservableEstimate> observables;
  int n_traj = 0;
  int n_repeats = 0;
  SchemeConfig scheme;
  int effective_order = 1;
  bool downgraded = false;
  int omitted_terms = 0;
  std::int64_t radius_violations = 0;
  std::int64_t total_steps = 0;
  std::int64_t aborted = 0;
  bool failed = false;
  std::vector<std::string> diagnostics;

  const ObservableEstimate& at(const std::string& name) const;
};

class RunFailure : public std::runtime_error {
 public:
  RunFailure(const std::string& what, EnsembleEstimate estimate)
      : std::runtime_error(what), estimate_(std::move(estimate)) {}
  const EnsembleEstimate& estimate() const { return estimate_; }

 private:
  EnsembleEstimate estimate_;
};

// Global trajectory index is repeat * n_traj + l; initial components are stratified over l.
EnsembleEstimate run_ensemble(const LindbladModel& model, const InitialEnsemble& initial,
                              const SchemeConfig& cfg, int n_steps,
                              const std::vector<std::string>& observables, int n_traj,
                              std::uint64_t master_seed, int n_repeats,
                              const EnsembleOptions& options = {});
EnsembleEstimate run_ensemble(const LindbladModel& model, const StateVector& psi0,
                              const SchemeConfig& cfg, int n_steps,
                              const std::vector<std::string>& observables, int n_traj,
                              std::uint64_t master_seed, int n_repeats,
                              const EnsembleOptions& options = {});

struct ErrorReport {
  std::vector<std::string> names;
  std::vector<std::vector<double>> per_step;  // |grand mean - exact| [o][n]
  std::vector<double> time_averaged;          // per observable, steps 1..N
  std::vector<double> repeat_errors;          // per repeat, averaged over steps and observables
  double mean = 0.0;                          // mean of repeat_errors
  double ci_halfwidth = 0.0;                  // 99% over repeats
};

ErrorReport error_vs_exact(const EnsembleEstimate& estimate, const ExactSeries& reference,
                           const std::vector<std::string>& observables = {});

struct WeakOrderPoint {
  double delta = 0.0;
  int n_steps = 0;
  double error = 0.0;
  double se = 0.0;
  bool below_noise_floor = false;
};

struct WeakOrderResult {
  std::vector<WeakOrderPoint> points;
  double slope = 0.0;
  double slope_ci = 0.0;
  bool inconclusive = false;
};

inline constexpr double kAbsoluteErrorFloor = 1e-12;

WeakOrderResult estimate_weak_order(const LindbladModel& model, const SchemeConfig& cfg,
                                    const std::vector<double>& deltas, int n_traj,
                                    const std::string& observable, double t_final,
                                    std::uint64_t master_seed, int n_repeats = 1,
                                    const EnsembleOptions& options = {});

}  // namespace lindmag
