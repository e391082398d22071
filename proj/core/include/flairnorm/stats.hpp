//------------------------------------------------------------------------------
//
//   Copyright 2026 The flairnorm Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flairnorm/metrics.hpp"

namespace flairnorm::stats {

/// (x^lambda - 1) / lambda, or ln x at lambda = 0. All data must be > 0.
std::vector<double> box_cox(std::span<const double> data, double lambda);

/// Box-Cox profile log-likelihood (population variance of the transform).
double box_cox_log_likelihood(std::span<const double> data, double lambda);

/// Maximum-likelihood lambda: grid over [-3, 3] in steps of 0.01, then
/// golden-section refinement around the best grid point. Needs n >= 10.
double box_cox_fit(std::span<const double> data);

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
};

/// Welch's unequal-variance two-sample t-test.
TTestResult welch_ttest(std::span<const double> a, std::span<const double> b);

/// Paired t-test on a[i] - b[i].
TTestResult paired_ttest(std::span<const double> a, std::span<const double> b);

/// Two-sided tail probability P(|T| >= |t|) of Student's t with `df` degrees
/// of freedom.
double student_t_two_sided_p(double t, double df);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

struct DscDelta {
  std::string volume_id;
  double delta = 0.0;  // dsc(method) - dsc(original)
};

struct DscImprovement {
  std::vector<DscDelta> deltas;  // sorted by volume_id
  double fraction_improved = 0.0;
  std::size_t improved = 0;
};

/// Per-volume DSC change of a method over the original, paired by volume_id.
/// Both lists must cover the same ids exactly once.
DscImprovement dsc_improvement(std::span<const EvalRecord> method_records,
                               std::span<const EvalRecord> original_records);

/// One significance entry: {metric, method, lambda, t, df, p,
/// significant_at_0.05}. lambda is absent when no transform was applied.
struct SignificanceResult {
  std::string metric;
  std::string method;
  std::optional<double> lambda;
  TTestResult test;
  bool significant = false;
  std::string note;
};

/// Compares one metric between a method and the original records. The pooled
/// sample is Box-Cox transformed first (with a fitted lambda) unless the metric
/// is avd_percent or the data are not all positive; NaN values are dropped.
SignificanceResult compare_metric(std::span<const EvalRecord> method_records,
                                  std::span<const EvalRecord> original_records,
                                  const std::string &metric, bool paired = false);

/// The report as a JSON array, one object per result.
std::string significance_json(std::span<const SignificanceResult> results);

}  // namespace flairnorm::stats
