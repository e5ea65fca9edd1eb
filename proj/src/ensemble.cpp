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

#include "lindmag/ensemble.hpp"

#include "lindmag/statistics.hpp"

#include <cmath>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lindmag {

namespace {

constexpr std::size_t kMaxDiagnostics = 8;

std::vector<const ComplexMatrix*> resolve(const LindbladModel& model,
                                          const std::vector<std::string>& names) {
  std::vector<const ComplexMatrix*> ops;
  for (const auto& n : names) ops.push_back(&model.observable(n));
  return ops;
}

double expect(const StateVector& psi, const ComplexMatrix& o) { return psi.dot(o * psi).real(); }

// Recorded step indices.
std::vector<int> record_steps(int n_steps, bool final_only) {
  std::vector<int> steps;
  if (final_only) {
    steps = {0, n_steps};
  } else {
    for (int n = 0; n <= n_steps; ++n) steps.push_back(n);
  }
  return steps;
}

struct TrajectoryOutcome {
  bool ok = true;
  int radius_violations = 0;
  std::string diagnostic;
};

// Writes obs values for recorded steps into out[record * n_obs + o].
TrajectoryOutcome propagate(const StepEngine& engine, const StateVector& psi0, int n_steps,
                            const std::vector<const ComplexMatrix*>& ops,
                            const std::vector<int>& records, StreamKey key, double* out,
                            double* weights) {
  TrajectoryOutcome outcome;
  const std::size_t n_obs = ops.size();
  StateVector psi = psi0;
  std::size_t next = 0;
  auto record = [&](int n) {
    while (next < records.size() && records[next] == n) {
      for (std::size_t o = 0; o < n_obs; ++o) out[next * n_obs + o] = expect(psi, *ops[o]);
      if (weights) weights[next] = psi.squaredNorm();
      ++next;
    }
  };
  record(0);
  try {
    for (int n = 1; n <= n_steps; ++n) {
      CounterRng rng(key.seed, key.trajectory, static_cast<std::uint64_t>(n));
      const StochasticIncrementSet inc = engine.sample(rng);
      StepReport report;
      psi = engine.step(psi, inc, &report);
      if (report.radius_violation) ++outcome.radius_violations;
      const double w = psi.squaredNorm();
      if (!std::isfinite(w) || w > 1e150) throw NumericalError("trajectory norm overflow");
      record(n);
    }
  } catch (const NumericalError& e) {
    outcome.ok = false;
    std::ostringstream s;
    s << "trajectory " << key.trajectory << ": " << e.what();
    outcome.diagnostic = s.str();
  }
  return outcome;
}

struct ChunkAccumulator {
  std::vector<double> sum;
  std::vector<double> sum_sq;
  std::int64_t ok = 0;
  std::int64_t aborted = 0;
  std::int64_t radius_violations = 0;
  std::vector<std::string> diagnostics;
};

}  // namespace

TrajectorySeries run_trajectory(const StepEngine& engine, const StateVector& psi0, int n_steps,
                                const std::vector<std::string>& observables, StreamKey key) {
  if (n_steps < 1) throw std::invalid_argument("run_trajectory: n_steps must be >= 1");
  if (psi0.size() != engine.model().dim()) throw DimensionError("run_trajectory: psi0 dimension");
  if (std::abs(psi0.norm() - 1.0) > 1e-10) throw std::invalid_argument("run_trajectory: psi0 not normalized");
  const auto ops = resolve(engine.model(), observables);
  const auto records = record_steps(n_steps, false);
  std::vector<double> buf(records.size() * ops.size());
  std::vector<double> weights(records.size());
  const TrajectoryOutcome outcome =
      propagate(engine, psi0, n_steps, ops, records, key, buf.data(), weights.data());
  TrajectorySeries s;
  s.names = observables;
  s.ok = outcome.ok;
  s.diagnostic = outcome.diagnostic;
  s.radius_violations = outcome.radius_violations;
  s.values.assign(ops.size(), std::vector<double>(records.size()));
  for (std::size_t r = 0; r < records.size(); ++r) {
    s.times.push_back(records[r] * engine.config().delta);
    for (std::size_t o = 0; o < ops.size(); ++o) s.values[o][r] = buf[r * ops.size() + o];
  }
  s.weights = weights;
  return s;
}

TrajectorySeries run_trajectory(const LindbladModel& model, const StateVector& psi0,
                                const SchemeConfig& cfg, int n_steps,
                                const std::vector<std::string>& observables, StreamKey key) {
  return run_trajectory(StepEngine(model, cfg), psi0, n_steps, observables, key);
}

const ObservableEstimate& EnsembleEstimate::at(const std::string& name) const {
  for (const auto& o : observables) {
    if (o.name == name) return o;
  }
  throw std::invalid_argument("EnsembleEstimate: unknown observable " + name);
}

EnsembleEstimate run_ensemble(const LindbladModel& model, const StateVector& psi0,
                              const SchemeConfig& cfg, int n_steps,
                              const std::vector<std::string>& observables, int n_traj,
                              std::uint64_t master_seed, int n_repeats,
                              const EnsembleOptions& options) {
  return run_ensemble(model, InitialEnsemble::pure(psi0), cfg, n_steps, observables, n_traj,
                      master_seed, n_repeats, options);
}

EnsembleEstimate run_ensemble(const LindbladModel& model, const InitialEnsemble& initial,
                              const SchemeConfig& cfg, int n_steps,
                              const std::vector<std::string>& observables, int n_traj,
                              std::uint64_t master_seed, int n_repeats,
                              const EnsembleOptions& options) {
  if (n_traj < 1) throw std::invalid_argument("run_ensemble: n_traj must be >= 1");
  if (n_repeats < 1) throw std::invalid_argument("run_ensemble: n_repeats must be >= 1");
  if (n_steps < 1) throw std::invalid_argument("run_ensemble: n_steps must be >= 1");
  if (options.chunk_size < 1) throw std::invalid_argument("run_ensemble: chunk_size must be >= 1");
  for (const auto& c : initial.components) {
    if (c.psi.size() != model.dim()) throw DimensionError("run_ensemble: initial state dimension");
  }
  const StepEngine engine(model, cfg);
  const auto ops = resolve(model, observables);
  const auto records = record_steps(n_steps, options.final_only);
  const std::size_t n_obs = ops.size();
  const std::size_t width = records.size() * n_obs;
  const int chunks_per_repeat = (n_traj + options.chunk_size - 1) / options.chunk_size;
  const int n_chunks = chunks_per_repeat * n_repeats;
  std::vector<ChunkAccumulator> chunks(static_cast<std::size_t>(n_chunks));

  auto run_chunk = [&](int c) {
    ChunkAccumulator& acc = chunks[static_cast<std::size_t>(c)];
    acc.sum.assign(width, 0.0);
    acc.sum_sq.assign(width, 0.0);
    std::vector<double> buf(width);
    const int repeat = c / chunks_per_repeat;
    const int first = (c % chunks_per_repeat) * options.chunk_size;
    const int last = std::min(n_traj, first + options.chunk_size);
    for (int l = first; l < last; ++l) {
      const std::uint64_t global = static_cast<std::uint64_t>(repeat) * n_traj + l;
      const StateVector& psi0 = initial.component_for(static_cast<std::uint64_t>(l),
                                                      static_cast<std::uint64_t>(n_traj));
      const TrajectoryOutcome out =
          propagate(engine, psi0, n_steps, ops, records, {master_seed, global}, buf.data(), nullptr);
      acc.radius_violations += out.radius_violations;
      if (!out.ok) {
        ++acc.aborted;
        if (acc.diagnostics.size() < kMaxDiagnostics) acc.diagnostics.push_back(out.diagnostic);
        continue;
      }
      ++acc.ok;
      for (std::size_t k = 0; k < width; ++k) {
        acc.sum[k] += buf[k];
        acc.sum_sq[k] += buf[k] * buf[k];
      }
    }
  };

  if (options.serial) {
    for (int c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
#ifdef _OPENMP
    const int threads = options.threads > 0 ? options.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (int c = 0; c < n_chunks; ++c) run_chunk(c);
#else
    for (int c = 0; c < n_chunks; ++c) run_chunk(c);
#endif
  }

  EnsembleEstimate est;
  est.n_traj = n_traj;
  est.n_repeats = n_repeats;
  est.scheme = cfg;
  est.effective_order = engine.sample_order();
  est.downgraded = engine.downgraded();
  est.omitted_terms = engine.omitted_terms();
  est.total_steps = static_cast<std::int64_t>(n_traj) * n_repeats * n_steps;
  for (int r : records) est.times.push_back(r * cfg.delta);
  est.observables.resize(n_obs);
  for (std::size_t o = 0; o < n_obs; ++o) {
    est.observables[o].name = observables[o];
    est.observables[o].repeat_means.assign(n_repeats, std::vector<double>(records.size()));
    est.observables[o].repeat_variances.assign(n_repeats, std::vector<double>(records.size()));
  }
  std::vector<double> pooled_var_sum(width, 0.0);
  std::int64_t total_ok = 0;
  for (int r = 0; r < n_repeats; ++r) {
    std::vector<double> sum(width, 0.0), sum_sq(width, 0.0);
    std::int64_t ok = 0;
    for (int c = r * chunks_per_repeat; c < (r + 1) * chunks_per_repeat; ++c) {
      const ChunkAccumulator& acc = chunks[static_cast<std::size_t>(c)];
      for (std::size_t k = 0; k < width; ++k) {
        sum[k] += acc.sum[k];
        sum_sq[k] += acc.sum_sq[k];
      }
      ok += acc.ok;
      est.aborted += acc.aborted;
      est.radius_violations += acc.radius_violations;
      for (const auto& d : acc.diagnostics) {
        if (est.diagnostics.size() < kMaxDiagnostics) est.diagnostics.push_back(d);
      }
    }
    total_ok += ok;
    for (std::size_t rec = 0; rec < records.size(); ++rec) {
      for (std::size_t o = 0; o < n_obs; ++o) {
        const std::size_t k = rec * n_obs + o;
        const double m = ok > 0 ? sum[k] / static_cast<double>(ok) : std::nan("");
        const double var = ok > 1 ? std::max(0.0, (sum_sq[k] - ok * m * m) / static_cast<double>(ok - 1)) : 0.0;
        est.observables[o].repeat_means[r][rec] = m;
        est.observables[o].repeat_variances[r][rec] = var;
        pooled_var_sum[k] += var;
      }
    }
  }
  for (std::size_t o = 0; o < n_obs; ++o) {
    auto& ob = est.observables[o];
    ob.mean.resize(records.size());
    ob.ci_halfwidth.resize(records.size());
    ob.pooled_se.resize(records.size());
    for (std::size_t rec = 0; rec < records.size(); ++rec) {
      std::vector<double> per_repeat(static_cast<std::size_t>(n_repeats));
      for (int r = 0; r < n_repeats; ++r) per_repeat[r] = ob.repeat_means[r][rec];
      ob.mean[rec] = stats::mean(per_repeat);
      ob.ci_halfwidth[rec] = stats::ci_halfwidth(per_repeat, 0.99);
      const double pooled_var = pooled_var_sum[rec * n_obs + o] / n_repeats;
      ob.pooled_se[rec] = total_ok > 0 ? std::sqrt(pooled_var / static_cast<double>(total_ok)) : 0.0;
    }
  }
  const double abort_fraction =
      static_cast<double>(est.aborted) / (static_cast<double>(n_traj) * n_repeats);
  if (abort_fraction > options.max_abort_fraction) {
    est.failed = true;
    if (options.throw_on_failure) {
      std::ostringstream s;
      s << "run failed: " << est.aborted << " of " << n_traj * n_repeats
        << " trajectories aborted (limit " << options.max_abort_fraction * 100 << "%)";
      throw RunFailure(s.str(), std::move(est));
    }
  }
  return est;
}

ErrorReport error_vs_exact(const EnsembleEstimate& estimate, const ExactSeries& reference,
                           const std::vector<std::string>& observables) {
  const std::vector<std::string> names = observables.empty() ? reference.names : observables;
  // Map estimate records onto reference times.
  std::vector<std::size_t> ref_index;
  for (double t : estimate.times) {
    bool found = false;
    for (std::size_t k = 0; k < reference.times.size(); ++k) {
      if (std::abs(reference.times[k] - t) <= 1e-9 * std::max(1.0, std::abs(t))) {
        ref_index.push_back(k);
        found = true;
        break;
      }
    }
    if (!found) throw std::invalid_argument("error_vs_exact: time grids do not match");
  }
  ErrorReport rep;
  rep.names = names;
  const std::size_t n_rec = estimate.times.size();
  const int n_rep = estimate.n_repeats;
  rep.repeat_errors.assign(static_cast<std::size_t>(n_rep), 0.0);
  std::size_t counted = 0;
  for (const auto& name : names) {
    const ObservableEstimate& ob = estimate.at(name);
    const std::vector<double>& ref = reference.series(name);
    std::vector<double> per_step(n_rec);
    double avg = 0.0;
    for (std::size_t n = 0; n < n_rec; ++n) {
      per_step[n] = std::abs(ob.mean[n] - ref[ref_index[n]]);
      if (n > 0) avg += per_step[n];
    }
    rep.per_step.push_back(per_step);
    rep.time_averaged.push_back(n_rec > 1 ? avg / static_cast<double>(n_rec - 1) : 0.0);
    for (int r = 0; r < n_rep; ++r) {
      for (std::size_t n = 1; n < n_rec; ++n) {
        rep.repeat_errors[r] += std::abs(ob.repeat_means[r][n] - ref[ref_index[n]]);
      }
    }
    counted += n_rec > 1 ? n_rec - 1 : 0;
  }
  if (counted > 0) {
    for (double& e : rep.repeat_errors) e /= static_cast<double>(counted);
  }
  rep.mean = stats::mean(rep.repeat_errors);
  rep.ci_halfwidth = stats::ci_halfwidth(rep.repeat_errors, 0.99);
  return rep;
}

WeakOrderResult estimate_weak_order(const LindbladModel& model, const SchemeConfig& cfg,
                                    const std::vector<double>& deltas, int n_traj,
                                    const std::string& observable, double t_final,
                                    std::uint64_t master_seed, int n_repeats,
                                    const EnsembleOptions& options) {
  if (deltas.size() < 3) throw std::invalid_argument("estimate_weak_order: need >= 3 step sizes");
  const auto [lo, hi] = std::minmax_element(deltas.begin(), deltas.end());
  if (*hi / *lo < 10.0 * (1.0 - 1e-12)) {
    throw std::invalid_argument("estimate_weak_order: step sizes must span a decade");
  }
  const DensityMatrix rho0 = model.initial.density_matrix();
  const double exact = (propagate_exact(model, rho0, t_final) * model.observable(observable)).trace().real();
  WeakOrderResult res;
  std::vector<double> lx, ly;
  EnsembleOptions opt = options;
  opt.final_only = true;
  for (double delta : deltas) {
    const double steps = t_final / delta;
    const int n_steps = static_cast<int>(std::lround(steps));
    if (n_steps < 1 || std::abs(steps - n_steps) > 1e-6 * steps) {
      throw std::invalid_argument("estimate_weak_order: t_final must be a multiple of every delta");
    }
    SchemeConfig c = cfg;
    c.delta = delta;
    const EnsembleEstimate est =
        run_ensemble(model, model.initial, c, n_steps, {observable}, n_traj, master_seed, n_repeats, opt);
    const ObservableEstimate& ob = est.observables.front();
    WeakOrderPoint pt;
    pt.delta = delta;
    pt.n_steps = n_steps;
    pt.error = std::abs(ob.mean.back() - exact);
    pt.se = ob.pooled_se.back();
    pt.below_noise_floor = pt.error <= 3.0 * pt.se || pt.error <= kAbsoluteErrorFloor;
    if (pt.below_noise_floor) res.inconclusive = true;
    res.points.push_back(pt);
    lx.push_back(std::log(delta));
    ly.push_back(std::log(std::max(pt.error, 1e-300)));
  }
  const stats::LinearFit fit = stats::linear_fit(lx, ly);
  res.slope = fit.slope;
  res.slope_ci = fit.slope_ci(0.99);
  return res;
}

}  // namespace lindmag
