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

#include "lindmag/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace lindmag::stats {

double mean(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

double student_t_quantile(double p, double dof) {
  if (!(dof > 0.0)) throw std::invalid_argument("student_t_quantile: dof must be > 0");
  boost::math::students_t dist(dof);
  return boost::math::quantile(dist, p);
}

double ci_halfwidth(double sd, std::size_t n, double level) {
  if (n < 2) return 0.0;
  const double t = student_t_quantile(0.5 + 0.5 * level, static_cast<double>(n - 1));
  return t * sd / std::sqrt(static_cast<double>(n));
}

double ci_halfwidth(const std::vector<double>& x, double level) {
  return ci_halfwidth(std::sqrt(variance(x)), x.size(), level);
}

double welch_less_pvalue(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("welch: empty sample");
  const double ma = mean(a), mb = mean(b);
  const double va = variance(a) / static_cast<double>(a.size());
  const double vb = variance(b) / static_cast<double>(b.size());
  const double se2 = va + vb;
  if (se2 == 0.0) return ma < mb ? 0.0 : 1.0;
  const double t = (ma - mb) / std::sqrt(se2);
  double dof = se2 * se2;
  double denom = 0.0;
  if (a.size() > 1) denom += va * va / static_cast<double>(a.size() - 1);
  if (b.size() > 1) denom += vb * vb / static_cast<double>(b.size() - 1);
  dof = denom > 0.0 ? dof / denom : 1.0;
  boost::math::students_t dist(std::max(dof, 1.0));
  return boost::math::cdf(dist, t);
}

double paired_less_pvalue(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("paired test: need matched samples, n >= 2");
  std::vector<double> d(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) d[k] = a[k] - b[k];
  const double m = mean(d);
  const double se = std::sqrt(variance(d) / static_cast<double>(d.size()));
  if (se == 0.0) return m < 0.0 ? 0.0 : 1.0;
  boost::math::students_t dist(static_cast<double>(d.size() - 1));
  return boost::math::cdf(dist, m / se);
}

double LinearFit::slope_ci(double level) const {
  if (dof < 1) return std::numeric_limits<double>::infinity();
  return student_t_quantile(0.5 + 0.5 * level, dof) * slope_se;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linear_fit: need >= 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("linear_fit: degenerate abscissae");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.dof = static_cast<int>(x.size()) - 2;
  if (f.dof > 0) {
    double rss = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double r = y[k] - f.intercept - f.slope * x[k];
      rss += r * r;
    }
    f.slope_se = std::sqrt(rss / (n - 2.0) / sxx);
  }
  return f;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  // The alternating series does not converge as lambda -> 0, where the tail is 1.
  double p = 1.0;
  if (lambda > 0.2) {
    p = 0.0;
    for (int k = 1; k <= 100; ++k) {
      const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
      p += term;
      if (std::abs(term) < 1e-12) break;
    }
  }
  return {d, std::clamp(p, 0.0, 1.0)};
}

}  // namespace lindmag::stats
