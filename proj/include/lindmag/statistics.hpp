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

#include <vector>

namespace lindmag::stats {

double mean(const std::vector<double>& x);
// Unbiased sample variance; 0 for fewer than two values.
double variance(const std::vector<double>& x);

double student_t_quantile(double p, double dof);
// Two-sided CI half-width of the mean at the given level; 0 for n < 2.
double ci_halfwidth(const std::vector<double>& x, double level = 0.99);
double ci_halfwidth(double sd, std::size_t n, double level = 0.99);

// One-sided Welch test p-value for H1: mean(a) < mean(b).
double welch_less_pvalue(const std::vector<double>& a, const std::vector<double>& b);
// One-sided paired t-test p-value for H1: mean(a - b) < 0; a and b share common random numbers.
double paired_less_pvalue(const std::vector<double>& a, const std::vector<double>& b);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  int dof = 0;
  double slope_ci(double level = 0.99) const;
};
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};
// Two-sample Kolmogorov-Smirnov with the asymptotic Kolmogorov distribution.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace lindmag::stats
