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

#include "lindmag/wiener.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lindmag {

namespace {

constexpr double kPi = std::numbers::pi;

void check_args(int d, double delta, int p, int order) {
  if (d < 0) throw std::invalid_argument("sample_increments: d must be >= 0");
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw std::invalid_argument("sample_increments: delta must be positive");
  }
  if (p < 1) throw std::invalid_argument("sample_increments: p must be >= 1");
  if (order < 1 || order > 4) throw std::invalid_argument("sample_increments: order must be 1..4");
}

StochasticIncrementSet make_empty(int d, double delta, int p, int order) {
  StochasticIncrementSet s;
  s.delta = delta;
  s.d = d;
  s.p = p;
  s.order = order;
  const auto n = static_cast<std::size_t>(d);
  s.w.assign(n, 0.0);
  s.a0.assign(n, 0.0);
  s.b.assign(n, 0.0);
  s.levy.assign(n * n, 0.0);
  s.c2.assign(n, 0.0);
  s.c3.assign(n, 0.0);
  s.c4.assign(n, 0.0);
  s.q.assign(n, 0.0);
  return s;
}

void finish_coefficients(StochasticIncrementSet& s) {
  const double delta = s.delta;
  for (int j = 0; j < s.d; ++j) {
    if (s.order >= 2) s.c2[j] = 0.5 * delta * s.a0[j];
    if (s.order >= 3) s.c3[j] = -delta * delta * s.b[j] / (2.0 * kPi);
  }
}

// Sums over r = 1..p of r^-2, r^-4, r^-6.
struct HarmonicSums {
  double s2 = 0.0, s4 = 0.0, s6 = 0.0;
};

HarmonicSums harmonic_sums(int p) {
  HarmonicSums h;
  for (int r = p; r >= 1; --r) {
    const double r2 = 1.0 / (static_cast<double>(r) * r);
    h.s2 += r2;
    h.s4 += r2 * r2;
    h.s6 += r2 * r2 * r2;
  }
  return h;
}

}  // namespace

double fourier_tail_variance(int p) {
  if (p < 1) throw std::invalid_argument("fourier_tail_variance: p must be >= 1");
  return std::max(0.0, 1.0 / 12.0 - harmonic_sums(p).s2 / (2.0 * kPi * kPi));
}

double truncation_error_bound(double delta, int p) {
  if (p < 1) throw std::invalid_argument("truncation_error_bound: p must be >= 1");
  return delta * delta / (2.0 * kPi * kPi * p);
}

double StochasticIncrementSet::same_channel_triple(int j) const {
  const double wj = w[j];
  const double j_j0 = 0.5 * delta * (wj + a0[j]);
  return 0.5 * delta * wj * wj - 2.0 * wj * j_j0 + 1.5 * q[j];
}

StochasticIncrementSet sample_increments_series(int d, double delta, int p, int order,
                                                CounterRng& rng) {
  check_args(d, delta, p, order);
  StochasticIncrementSet s = make_empty(d, delta, p, order);
  const double sqrt_delta = std::sqrt(delta);
  for (int j = 0; j < d; ++j) s.w[j] = sqrt_delta * rng.normal();
  if (order >= 2) {
    const auto n = static_cast<std::size_t>(d);
    const auto np = static_cast<std::size_t>(p);
    std::vector<double> a(n * np), bb(n * np);
    const double tail_sd = 2.0 * std::sqrt(delta * fourier_tail_variance(p));
    std::vector<double> sum_sq(n, 0.0);
    for (int j = 0; j < d; ++j) {
      double sum_a = 0.0, sum_b_r = 0.0, sum_a_r2 = 0.0;
      for (int r = 1; r <= p; ++r) {
        const double sd = sqrt_delta / (kPi * r * std::numbers::sqrt2);
        const double ar = sd * rng.normal();
        const double br = sd * rng.normal();
        a[j * np + (r - 1)] = ar;
        bb[j * np + (r - 1)] = br;
        sum_a += ar;
        sum_b_r += br / r;
        sum_a_r2 += ar / (static_cast<double>(r) * r);
        sum_sq[j] += ar * ar + br * br;
      }
      s.a0[j] = -2.0 * sum_a - tail_sd * rng.normal();
      s.b[j] = sum_b_r;
      if (order >= 4) s.c4[j] = -delta * delta * delta / (4.0 * kPi * kPi) * sum_a_r2;
    }
    for (int i = 0; i < d; ++i) {
      for (int j = i + 1; j < d; ++j) {
        double area = 0.0;
        for (int r = 1; r <= p; ++r) {
          const std::size_t ir = i * np + (r - 1), jr = j * np + (r - 1);
          area += r * (a[jr] * bb[ir] - bb[jr] * a[ir]);
        }
        area *= kPi / delta;  // A_{j,i}
        const double value = 0.5 * (s.a0[j] * s.w[i] - s.a0[i] * s.w[j]) + delta * area;
        s.levy[i * n + j] = value;
        s.levy[j * n + i] = -value;
      }
    }
    s.has_levy = true;
    if (order >= 3) {
      const double tail_mean = delta * delta * fourier_tail_variance(p);
      for (int j = 0; j < d; ++j) {
        const double wj = s.w[j], a0j = s.a0[j];
        s.q[j] = wj * wj * delta / 3.0 + a0j * wj * delta / 2.0 + a0j * a0j * delta / 4.0 -
                 wj * delta * s.b[j] / kPi + 0.5 * delta * sum_sq[j] + tail_mean;
      }
      s.has_quadratic = true;
    }
  }
  finish_coefficients(s);
  return s;
}

StochasticIncrementSet sample_increments(int d, double delta, int p, int order, CounterRng& rng,
                                         const SamplerNeeds& needs) {
  check_args(d, delta, p, order);
  const bool series = (order >= 2 && needs.levy_area && d >= 2) || (order >= 3 && needs.quadratic);
  if (series) return sample_increments_series(d, delta, p, order, rng);

  StochasticIncrementSet s = make_empty(d, delta, p, order);
  s.has_levy = d <= 1;
  const double sqrt_delta = std::sqrt(delta);
  for (int j = 0; j < d; ++j) s.w[j] = sqrt_delta * rng.normal();
  if (order >= 2) {
    // Joint law of (-2 sum a_r, sum a_r / r^2) and sum b_r / r over r <= p.
    const HarmonicSums h = harmonic_sums(p);
    const double v = delta / (2.0 * kPi * kPi);
    const double var_x1 = 4.0 * v * h.s2;
    const double cov = -2.0 * v * h.s4;
    const double var_x2 = v * h.s6;
    const double l11 = std::sqrt(var_x1);
    const double l21 = cov / l11;
    const double l22 = std::sqrt(std::max(0.0, var_x2 - l21 * l21));
    const double sd_b = std::sqrt(v * h.s4);
    const double tail_sd = 2.0 * std::sqrt(delta * fourier_tail_variance(p));
    for (int j = 0; j < d; ++j) {
      const double z1 = rng.normal();
      const double z2 = rng.normal();
      const double x1 = l11 * z1;
      const double x2 = l21 * z1 + l22 * z2;
      s.a0[j] = x1 - tail_sd * rng.normal();
      s.b[j] = sd_b * rng.normal();
      if (order >= 4) s.c4[j] = -delta * delta * delta / (4.0 * kPi * kPi) * x2;
    }
  }
  finish_coefficients(s);
  return s;
}

}  // namespace lindmag
