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
#include "flairnorm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <json.hpp>

#include "flairnorm/error.hpp"

namespace flairnorm::stats {

namespace {

constexpr double kGridLo = -3.0;
constexpr double kGridHi = 3.0;
constexpr double kGridStep = 0.01;
constexpr double kAlpha = 0.05;

void require_positive(std::span<const double> data) {
  for (double x : data) {
    if (!(x > 0.0)) {
      throw Error(ErrorCode::NonPositiveData, "Box-Cox needs strictly positive data");
    }
  }
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Sum of squared deviations from the mean.
double centered_ss(std::span<const double> v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss;
}

double transform_one(double x, double lambda) {
  return lambda == 0.0 ? std::log(x) : std::expm1(lambda * std::log(x)) / lambda;
}

// Continued fraction for the incomplete beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

std::vector<double> box_cox(std::span<const double> data, double lambda) {
  require_positive(data);
  std::vector<double> out(data.size());
  std::transform(data.begin(), data.end(), out.begin(),
                 [lambda](double x) { return transform_one(x, lambda); });
  return out;
}

double box_cox_log_likelihood(std::span<const double> data, double lambda) {
  const auto y = box_cox(data, lambda);
  const double n = static_cast<double>(y.size());
  const double var = centered_ss(y, mean_of(y)) / n;
  if (!(var > 0.0)) return -std::numeric_limits<double>::infinity();
  double log_sum = 0.0;
  for (double x : data) log_sum += std::log(x);
  return (lambda - 1.0) * log_sum - 0.5 * n * std::log(var);
}

double box_cox_fit(std::span<const double> data) {
  if (data.size() < 10) {
    throw Error(ErrorCode::TooFewSamples, "Box-Cox fit needs at least 10 samples");
  }
  require_positive(data);
  const auto [mn, mx] = std::minmax_element(data.begin(), data.end());
  if (*mn == *mx) {
    throw Error(ErrorCode::DegenerateData, "Box-Cox fit of constant data");
  }

  const int steps = static_cast<int>(std::lround((kGridHi - kGridLo) / kGridStep));
  double best_lambda = kGridLo;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= steps; ++i) {
    const double lambda = (i - steps / 2) / 100.0;
    const double ll = box_cox_log_likelihood(data, lambda);
    if (ll > best_ll) {
      best_ll = ll;
      best_lambda = lambda;
    }
  }
  if (!std::isfinite(best_ll)) {
    throw Error(ErrorCode::DegenerateData, "Box-Cox likelihood is degenerate");
  }

  // Golden-section search on the bracketing grid cell pair.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = std::max(kGridLo, best_lambda - kGridStep);
  double b = std::min(kGridHi, best_lambda + kGridStep);
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = box_cox_log_likelihood(data, c);
  double fd = box_cox_log_likelihood(data, d);
  for (int it = 0; it < 100 && (b - a) > 1e-12; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = box_cox_log_likelihood(data, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = box_cox_log_likelihood(data, d);
    }
  }
  const double refined = 0.5 * (a + b);
  return box_cox_log_likelihood(data, refined) >= best_ll ? refined : best_lambda;
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || x < 0.0 || x > 1.0) {
    throw Error(ErrorCode::InvalidArgument, "incomplete beta arguments out of range");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw Error(ErrorCode::InvalidArgument, "df must be positive");
  if (t == 0.0) return 1.0;
  return incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
}

TTestResult welch_ttest(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw Error(ErrorCode::TooFewSamples, "t-test needs at least 2 samples per group");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = mean_of(a), mb = mean_of(b);
  const double va = centered_ss(a, ma) / (na - 1.0);
  const double vb = centered_ss(b, mb) / (nb - 1.0);
  if (va == 0.0 && vb == 0.0) {
    throw Error(ErrorCode::ZeroVarianceBoth, "both samples have zero variance");
  }
  const double sa = va / na, sb = vb / nb;
  TTestResult r;
  r.t = (ma - mb) / std::sqrt(sa + sb);
  r.df = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  r.p = student_t_two_sided_p(r.t, r.df);
  return r;
}

TTestResult paired_ttest(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::IdMismatch, "paired t-test needs equal-length samples");
  }
  if (a.size() < 2) throw Error(ErrorCode::TooFewSamples, "paired t-test needs n >= 2");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
  const double n = static_cast<double>(d.size());
  const double md = mean_of(d);
  const double vd = centered_ss(d, md) / (n - 1.0);
  TTestResult r;
  r.df = n - 1.0;
  if (vd == 0.0) {
    if (md != 0.0) {
      throw Error(ErrorCode::ZeroVarianceBoth, "paired differences are constant");
    }
    return r;
  }
  r.t = md / std::sqrt(vd / n);
  r.p = student_t_two_sided_p(r.t, r.df);
  return r;
}

DscImprovement dsc_improvement(std::span<const EvalRecord> method_records,
                               std::span<const EvalRecord> original_records) {
  if (method_records.empty()) throw Error(ErrorCode::EmptyInput, "no records");
  auto index = [](std::span<const EvalRecord> recs) {
    std::map<std::string, double> m;
    for (const EvalRecord &r : recs) {
      if (!m.emplace(r.volume_id, r.dsc).second) {
        throw Error(ErrorCode::IdMismatch, "duplicate volume id " + r.volume_id);
      }
    }
    return m;
  };
  const auto ms = index(method_records);
  const auto os = index(original_records);
  if (ms.size() != os.size()) {
    throw Error(ErrorCode::IdMismatch, "record sets cover different volumes");
  }
  DscImprovement out;
  for (const auto &[id, dsc] : ms) {
    const auto it = os.find(id);
    if (it == os.end()) throw Error(ErrorCode::IdMismatch, "no original record for " + id);
    const double delta = dsc - it->second;
    out.deltas.push_back({id, delta});
    if (delta > 0.0) ++out.improved;
  }
  out.fraction_improved =
      static_cast<double>(out.improved) / static_cast<double>(out.deltas.size());
  return out;
}

namespace {

double EvalRecord::*metric_field(const std::string &metric) {
  if (metric == "dsc") return &EvalRecord::dsc;
  if (metric == "ef") return &EvalRecord::ef;
  if (metric == "h95_mm") return &EvalRecord::h95_mm;
  if (metric == "avd_percent") return &EvalRecord::avd_percent;
  if (metric == "f1_lesion") return &EvalRecord::f1_lesion;
  if (metric == "recall_lesion") return &EvalRecord::recall_lesion;
  throw Error(ErrorCode::InvalidArgument, "unknown metric '" + metric + "'");
}

}  // namespace

SignificanceResult compare_metric(std::span<const EvalRecord> method_records,
                                  std::span<const EvalRecord> original_records,
                                  const std::string &metric, bool paired) {
  const auto field = metric_field(metric);
  SignificanceResult res;
  res.metric = metric;
  res.method = method_records.empty() ? "" : method_records.front().method;

  std::vector<double> a, b;
  if (paired) {
    std::map<std::string, double> orig;
    for (const EvalRecord &r : original_records) orig[r.volume_id] = r.*field;
    std::vector<const EvalRecord *> sorted;
    for (const EvalRecord &r : method_records) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(),
              [](auto *x, auto *y) { return x->volume_id < y->volume_id; });
    for (const EvalRecord *r : sorted) {
      const auto it = orig.find(r->volume_id);
      if (it == orig.end()) throw Error(ErrorCode::IdMismatch, "unpaired " + r->volume_id);
      if (std::isnan(r->*field) || std::isnan(it->second)) continue;
      a.push_back(r->*field);
      b.push_back(it->second);
    }
  } else {
    for (const EvalRecord &r : method_records)
      if (!std::isnan(r.*field)) a.push_back(r.*field);
    for (const EvalRecord &r : original_records)
      if (!std::isnan(r.*field)) b.push_back(r.*field);
  }

  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const bool positive = std::all_of(pooled.begin(), pooled.end(),
                                    [](double x) { return x > 0.0; });
  if (metric == "avd_percent") {
    res.note = "AVD is not Box-Cox transformed";
  } else if (!positive) {
    res.note = "non-positive values; no transform";
  } else {
    try {
      const double lambda = box_cox_fit(pooled);
      a = box_cox(a, lambda);
      b = box_cox(b, lambda);
      res.lambda = lambda;
    } catch (const Error &e) {
      res.note = std::string("no transform: ") + e.what();
    }
  }
  res.test = paired ? paired_ttest(a, b) : welch_ttest(a, b);
  res.significant = res.test.p < kAlpha;
  return res;
}

std::string significance_json(std::span<const SignificanceResult> results) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const SignificanceResult &r : results) {
    nlohmann::ordered_json j;
    j["metric"] = r.metric;
    j["method"] = r.method;
    j["lambda"] = r.lambda ? nlohmann::ordered_json(*r.lambda) : nlohmann::ordered_json();
    j["t"] = r.test.t;
    j["df"] = r.test.df;
    j["p"] = r.test.p;
    j["significant_at_0.05"] = r.significant;
    if (!r.note.empty()) j["note"] = r.note;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

}  // namespace flairnorm::stats
