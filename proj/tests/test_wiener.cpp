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

#include "lindmag/statistics.hpp"
#include "lindmag/wiener.hpp"

#include <numbers>
#include <random>

using namespace lindmag;

namespace {

constexpr double kDelta = 0.25;
constexpr int kP = 200;
constexpr int kSamples = 20000;
constexpr double kKsAlpha = 1e-3;

// Iterated integrals of a two-channel Brownian path on a fine grid.
struct FinePath {
  double w[2] = {0, 0};
  double bridge_int[2] = {0, 0};  // int (W_t - t W/Delta) dt
  double c3[2] = {0, 0};          // int (t - Delta/2) B_t dt
  double c4[2] = {0, 0};          // -1/2 int ((t - Delta/2)^2 - Delta^2/12) B_t dt
  double j_j0[2] = {0, 0};        // int W dt
  double q[2] = {0, 0};           // int W^2 dt
  double triple[2] = {0, 0};      // J_0jj - J_j0j
  double levy01 = 0.0;            // (J_10 - J_01) / 2 with J_ij = int W^i o dW^j
};

FinePath fine_path(std::mt19937_64& gen, int m) {
  std::normal_distribution<double> g;
  const double h = kDelta / m;
  FinePath f;
  std::vector<double> path[2];
  for (int c = 0; c < 2; ++c) {
    path[c].assign(m + 1, 0.0);
    for (int k = 0; k < m; ++k) path[c][k + 1] = path[c][k] + std::sqrt(h) * g(gen);
    f.w[c] = path[c][m];
  }
  double j01 = 0.0, j10 = 0.0;
  for (int c = 0; c < 2; ++c) {
    const auto& w = path[c];
    double i1 = 0.0, i2 = 0.0, j0jj = 0.0, jj0j = 0.0;
    for (int k = 0; k < m; ++k) {
      const double t0 = k * h, t1 = t0 + h, tm = t0 + 0.5 * h;
      const double dw = w[k + 1] - w[k];
      const double wm = 0.5 * (w[k] + w[k + 1]);
      const double bm = wm - tm * f.w[c] / kDelta;
      f.bridge_int[c] += h * bm;
      f.c3[c] += h * (tm - 0.5 * kDelta) * bm;
      const double u = tm - 0.5 * kDelta;
      f.c4[c] += -0.5 * h * (u * u - kDelta * kDelta / 12.0) * bm;
      f.j_j0[c] += h * wm;
      f.q[c] += h * (w[k] * w[k] + w[k] * w[k + 1] + w[k + 1] * w[k + 1]) / 3.0;
      // Stratonovich midpoint rule for the outer integrals.
      const double i1_next = i1 + tm * dw;
      const double i2_next = i2 + h * wm;
      j0jj += 0.5 * (i1 + i1_next) * dw;
      jj0j += 0.5 * (i2 + i2_next) * dw;
      i1 = i1_next;
      i2 = i2_next;
      (void)t1;
    }
    f.triple[c] = j0jj - jj0j;
  }
  for (int k = 0; k < m; ++k) {
    const double m0 = 0.5 * (path[0][k] + path[0][k + 1]), m1 = 0.5 * (path[1][k] + path[1][k + 1]);
    j01 += m0 * (path[1][k + 1] - path[1][k]);
    j10 += m1 * (path[0][k + 1] - path[0][k]);
  }
  f.levy01 = 0.5 * (j10 - j01);
  return f;
}

struct Samples {
  std::vector<double> c2, c3, c4, q, triple, levy, w, levy_w0_a1;
};

Samples oracle_samples(int n) {
  std::mt19937_64 gen(12345);
  Samples s;
  for (int k = 0; k < n; ++k) {
    const FinePath f = fine_path(gen, 400);
    s.c2.push_back(f.bridge_int[0]);
    s.c3.push_back(f.c3[0]);
    s.c4.push_back(f.c4[0]);
    s.q.push_back(f.q[0]);
    s.triple.push_back(f.triple[0]);
    s.levy.push_back(f.levy01);
    s.w.push_back(f.w[0]);
    // a_{1,0} = (2/Delta) int B^1 dt.
    s.levy_w0_a1.push_back(f.levy01 * f.w[0] * 2.0 * f.bridge_int[1] / kDelta);
  }
  return s;
}

Samples sampler_samples(int n, bool series) {
  Samples s;
  for (int k = 0; k < n; ++k) {
    CounterRng rng(99, static_cast<std::uint64_t>(k), 1);
    const StochasticIncrementSet inc = series ? sample_increments_series(2, kDelta, kP, 4, rng)
                                              : sample_increments(2, kDelta, kP, 4, rng, {false, false});
    s.c2.push_back(inc.c2[0]);
    s.c3.push_back(inc.c3[0]);
    s.c4.push_back(inc.c4[0]);
    s.w.push_back(inc.w[0]);
    if (series) {
      s.q.push_back(inc.q[0]);
      s.triple.push_back(inc.same_channel_triple(0));
      s.levy.push_back(inc.levy_at(0, 1));
      s.levy_w0_a1.push_back(inc.levy_at(0, 1) * inc.w[0] * inc.a0[1]);
    }
  }
  return s;
}

const Samples& oracle() {
  static const Samples s = oracle_samples(kSamples);
  return s;
}

void check_same_law(const std::vector<double>& a, const std::vector<double>& b, const char* what) {
  const stats::KsResult r = stats::ks_two_sample(a, b);
  CAPTURE(what);
  CAPTURE(r.statistic);
  CHECK(r.p_value > kKsAlpha);
}

}  // namespace

TEST_CASE("fine-grid oracle reproduces the triple-integral identity pathwise") {
  std::mt19937_64 gen(7);
  for (int k = 0; k < 50; ++k) {
    const FinePath f = fine_path(gen, 4000);
    const double w = f.w[0];
    const double formula = 0.5 * kDelta * w * w - 2.0 * w * f.j_j0[0] + 1.5 * f.q[0];
    CHECK(std::abs(formula - f.triple[0]) < 2e-3 * kDelta * kDelta);
  }
}

TEST_CASE("series sampler matches the Brownian oracle in law") {
  const Samples s = sampler_samples(kSamples, true);
  const Samples& o = oracle();
  check_same_law(s.w, o.w, "W");
  check_same_law(s.c2, o.c2, "c2");
  check_same_law(s.c3, o.c3, "c3");
  check_same_law(s.c4, o.c4, "c4");
  check_same_law(s.q, o.q, "q");
  check_same_law(s.triple, o.triple, "same-channel triple");
  check_same_law(s.levy, o.levy, "levy area");
  // Sign convention of the cross term: E[levy01 W^0 a_{1,0}] = E[a_{1,0}^2] E[(W^0)^2] / 2 > 0.
  const double se = std::sqrt(stats::variance(o.levy_w0_a1) / kSamples + stats::variance(s.levy_w0_a1) / kSamples);
  CHECK(std::abs(stats::mean(s.levy_w0_a1) - stats::mean(o.levy_w0_a1)) < 4.0 * se);
  CHECK(stats::mean(s.levy_w0_a1) > 4.0 * std::sqrt(stats::variance(s.levy_w0_a1) / kSamples));
}

TEST_CASE("compact sampler has the same law as the series") {
  const Samples compact = sampler_samples(kSamples, false);
  const Samples& o = oracle();
  check_same_law(compact.c2, o.c2, "c2");
  check_same_law(compact.c3, o.c3, "c3");
  check_same_law(compact.c4, o.c4, "c4");
  std::vector<double> cross_a, cross_b;
  const Samples series = sampler_samples(kSamples, true);
  for (int k = 0; k < kSamples; ++k) {
    cross_a.push_back(compact.c2[k] * compact.c4[k]);
    cross_b.push_back(series.c2[k] * series.c4[k]);
  }
  // Joint law: the c2-c4 correlation survives the compact parametrization.
  check_same_law(cross_a, cross_b, "c2 * c4");
}

TEST_CASE("closed-form coefficient variances") {
  const int n = 100000;
  std::vector<double> c2, c3, c4, levy;
  for (int k = 0; k < n; ++k) {
    CounterRng rng(5, static_cast<std::uint64_t>(k), 1);
    const StochasticIncrementSet inc = sample_increments(2, kDelta, kP, 4, rng, {true, false});
    c2.push_back(inc.c2[0]);
    c3.push_back(inc.c3[0]);
    c4.push_back(inc.c4[1]);
    levy.push_back(inc.levy_at(0, 1));
  }
  const double d = kDelta;
  // Relative SE of a Gaussian variance estimate is sqrt(2/n) ~ 0.45%.
  CHECK(stats::variance(c2) == doctest::Approx(std::pow(d, 3) / 12.0).epsilon(0.025));
  CHECK(stats::variance(c3) == doctest::Approx(std::pow(d, 5) / 720.0).epsilon(0.025));
  CHECK(stats::variance(c4) == doctest::Approx(std::pow(d, 7) / 30240.0).epsilon(0.025));
  // Standard Levy area variance Delta^2 / 12.
  CHECK(stats::variance(levy) == doctest::Approx(d * d / 12.0).epsilon(0.03));
}

TEST_CASE("Levy matrix is antisymmetric with zero diagonal") {
  CounterRng rng(3, 0, 1);
  const StochasticIncrementSet inc = sample_increments_series(4, 0.1, 50, 2, rng);
  REQUIRE(inc.has_levy);
  for (int i = 0; i < 4; ++i) {
    CHECK(inc.levy_at(i, i) == 0.0);
    for (int j = 0; j < 4; ++j) CHECK(inc.levy_at(i, j) == -inc.levy_at(j, i));
  }
}

TEST_CASE("Wiener increments are shared across sampler paths and orders") {
  for (int order = 1; order <= 4; ++order) {
    CounterRng a(11, 2, 3), b(11, 2, 3);
    const StochasticIncrementSet x = sample_increments(3, 0.2, 100, order, a, {false, false});
    const StochasticIncrementSet y = sample_increments_series(3, 0.2, 100, 1, b);
    CHECK(x.w == y.w);
  }
}

TEST_CASE("order gates the optional coefficients") {
  CounterRng rng(1, 1, 1);
  const StochasticIncrementSet s1 = sample_increments(2, 0.1, 20, 1, rng);
  CHECK(s1.c2 == std::vector<double>{0.0, 0.0});
  CounterRng rng2(1, 1, 1);
  const StochasticIncrementSet s2 = sample_increments(2, 0.1, 20, 2, rng2, {false, false});
  CHECK_FALSE(s2.has_levy);
  CHECK(s2.c3 == std::vector<double>{0.0, 0.0});
  CounterRng rng3(1, 1, 1);
  const StochasticIncrementSet s3 = sample_increments(1, 0.1, 20, 3, rng3, {false, true});
  CHECK(s3.has_quadratic);
  CHECK(std::abs(s3.c2[0] - 0.05 * s3.a0[0]) < 1e-16);
}

TEST_CASE("truncation helpers") {
  CHECK(fourier_tail_variance(1) == doctest::Approx(1.0 / 12.0 - 1.0 / (2.0 * std::numbers::pi * std::numbers::pi)));
  CHECK(fourier_tail_variance(200) < fourier_tail_variance(100));
  CHECK(fourier_tail_variance(200) > 0.0);
  CHECK(truncation_error_bound(0.25, 200) == doctest::Approx(0.0625 / (2 * std::numbers::pi * std::numbers::pi * 200)));
  CounterRng rng(1, 1, 1);
  CHECK_THROWS_AS(sample_increments(1, 0.0, 10, 1, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_increments(1, 0.1, 0, 1, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_increments(1, 0.1, 10, 5, rng), std::invalid_argument);
}
