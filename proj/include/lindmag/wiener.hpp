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

#include "lindmag/rng.hpp"

#include <vector>

namespace lindmag {

inline constexpr int kDefaultFourierOrder = 200;

// Which optional pieces of the Brownian-bridge expansion a step needs.
struct SamplerNeeds {
  bool levy_area = true;   // cross-channel A_{j1,j2}
  bool quadratic = true;   // q_j = int_0^Delta (W^j_s)^2 ds
};

struct StochasticIncrementSet {
  double delta = 0.0;
  int d = 0;
  int p = 0;
  int order = 1;
  std::vector<double> w;   // W^j
  std::vector<double> a0;  // a_{j,0}
  std::vector<double> b;   // b_j = sum_r b_{j,r} / r
  // levy[i*d + j] = (J_ji - J_ij) / 2, antisymmetric.
  std::vector<double> levy;
  std::vector<double> c2;  // Delta a_{j,0} / 2
  std::vector<double> c3;  // -Delta^2 b_j / (2 pi)
  std::vector<double> c4;  // (J_0j00 - J_00j0) / 6
  std::vector<double> q;   // int (W^j)^2 ds
  bool has_levy = false;
  bool has_quadratic = false;

  double levy_at(int i, int j) const { return levy[static_cast<std::size_t>(i * d + j)]; }
  // J_{0jj} - J_{j0j}.
  double same_channel_triple(int j) const;
};

// Fourier series path when levy_area or quadratic is needed, otherwise the
// equivalent joint Gaussian over the same truncated series.
StochasticIncrementSet sample_increments(int d, double delta, int p, int order, CounterRng& rng,
                                         const SamplerNeeds& needs = {});

// Full series path regardless of needs (reference for the compact sampler).
StochasticIncrementSet sample_increments_series(int d, double delta, int p, int order,
                                                CounterRng& rng);

double truncation_error_bound(double delta, int p);

// 1/12 - (1/(2 pi^2)) sum_{r<=p} r^-2, the a_{j,0} variance left by truncation (over Delta).
double fourier_tail_variance(int p);

}  // namespace lindmag
