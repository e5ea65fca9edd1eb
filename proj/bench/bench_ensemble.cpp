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
#include "lindmag/models.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace lindmag;

namespace {

SchemeConfig scheme_two() {
  SchemeConfig c;
  c.order = 2;
  c.delta = 0.25;
  return c;
}

const LindbladModel& tfim() {
  static const LindbladModel m = build_tfim(2, 1.0, 1.0, {0.1, 0.1});
  return m;
}

void run(benchmark::State& state, bool serial) {
  EnsembleOptions o;
  o.serial = serial;
  o.threads = serial ? 1 : static_cast<int>(state.range(1));
  const int n_traj = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto est = run_ensemble(tfim(), tfim().initial, scheme_two(), 100, {"p11"}, n_traj, 1, 1, o);
    benchmark::DoNotOptimize(est.observables[0].mean.back());
  }
  state.SetItemsProcessed(state.iterations() * n_traj * 100);
}

void BM_EnsembleSerial(benchmark::State& state) { run(state, true); }
void BM_EnsembleOpenMP(benchmark::State& state) { run(state, false); }

BENCHMARK(BM_EnsembleSerial)->Args({256, 1})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnsembleOpenMP)->Args({256, 1})->Args({256, 2})->Args({256, 4})->Unit(benchmark::kMillisecond);

ComplexMatrix random_generator(Eigen::Index n) {
  std::mt19937 gen(3);
  std::normal_distribution<double> g;
  ComplexMatrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = Complex(g(gen), g(gen)) / std::sqrt(double(n));
  return a;
}

void BM_ExpmDense(benchmark::State& state) {
  const ComplexMatrix a = random_generator(state.range(0));
  const StateVector v = StateVector::Ones(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize((expm(a) * v).eval());
}

void BM_ExpmKrylov(benchmark::State& state) {
  const ComplexMatrix a = random_generator(state.range(0));
  const StateVector v = StateVector::Ones(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(krylov_expm_action(a, v));
}

BENCHMARK(BM_ExpmDense)->Arg(16)->Arg(64)->Arg(256);
BENCHMARK(BM_ExpmKrylov)->Arg(16)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
