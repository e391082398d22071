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
#include "flairnorm/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "flairnorm/error.hpp"

namespace flairnorm {

Histogram::Histogram(std::vector<double> edges, std::vector<double> counts,
                     bool normalized)
    : edges_(std::move(edges)),
      counts_(std::move(counts)),
      normalized_(normalized) {
  if (edges_.size() < 2 || counts_.size() + 1 != edges_.size()) {
    throw Error(ErrorCode::InvalidArgument,
                "histogram needs B+1 edges for B counts");
  }
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (!(edges_[i] > edges_[i - 1])) {
      throw Error(ErrorCode::InvalidArgument,
                  "histogram edges must be strictly increasing");
    }
  }
  for (double c : counts_) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw Error(ErrorCode::InvalidArgument,
                  "histogram counts must be finite and non-negative");
    }
  }
  if (normalized_ && std::abs(total() - 1.0) > 1e-9) {
    throw Error(ErrorCode::NotNormalized,
                "normalized histogram must sum to 1");
  }
}

double Histogram::total() const noexcept {
  return std::accumulate(counts_.begin(), counts_.end(), 0.0);
}

Histogram Histogram::to_normalized() const {
  const double t = total();
  if (!(t > 0.0)) {
    throw Error(ErrorCode::EmptyMask, "cannot normalize an empty histogram");
  }
  std::vector<double> c(counts_.size());
  std::transform(counts_.begin(), counts_.end(), c.begin(),
                 [t](double x) { return x / t; });
  return Histogram(edges_, std::move(c), true);
}

std::vector<double> uniform_edges(double lo, double hi, std::size_t bins) {
  std::vector<double> edges(bins + 1);
  const double width = hi - lo;
  for (std::size_t i = 0; i <= bins; ++i) {
    edges[i] = lo + width * static_cast<double>(i) / static_cast<double>(bins);
  }
  edges.back() = hi;
  return edges;
}

std::optional<std::size_t> bin_index(std::span<const double> edges, double v) {
  const std::size_t bins = edges.size() - 1;
  const double lo = edges.front();
  const double hi = edges.back();
  if (!(v >= lo) || !(v <= hi)) return std::nullopt;
  if (v == hi) return bins - 1;

  // Arithmetic guess, then settle against the stored edges so the answer is
  // always consistent with edges[i] <= v < edges[i+1].
  auto guess = static_cast<std::ptrdiff_t>(
      std::floor((v - lo) / (hi - lo) * static_cast<double>(bins)));
  std::size_t i = static_cast<std::size_t>(
      std::clamp<std::ptrdiff_t>(guess, 0, static_cast<std::ptrdiff_t>(bins) - 1));
  while (i > 0 && v < edges[i]) --i;
  while (i + 1 < bins && v >= edges[i + 1]) ++i;
  return i;
}

Histogram compute_histogram(const Volume &volume, const Mask &mask,
                            std::size_t bins, std::optional<Range> range) {
  require_same_dims(volume.dims(), mask.dims(), "compute_histogram");
  if (bins < 2) {
    throw Error(ErrorCode::InvalidArgument, "histogram needs at least 2 bins");
  }
  if (mask.count() == 0) {
    throw Error(ErrorCode::EmptyMask, "histogram of an empty mask");
  }

  const auto v = volume.voxels();
  const auto m = mask.bits();

  double lo, hi;
  if (range) {
    std::tie(lo, hi) = *range;
  } else {
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!m[i]) continue;
      lo = std::min(lo, v[i]);
      hi = std::max(hi, v[i]);
    }
  }
  if (!(lo < hi)) {
    throw Error(ErrorCode::DegenerateRange,
                "histogram range is empty (lo >= hi)");
  }

  const std::vector<double> edges = uniform_edges(lo, hi, bins);
  std::vector<double> counts(bins, 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!m[i]) continue;
    if (auto b = bin_index(edges, v[i])) counts[*b] += 1.0;
  }
  return Histogram(edges, std::move(counts), false);
}

Histogram mean_histogram(std::span<const Histogram> histograms) {
  if (histograms.empty()) {
    throw Error(ErrorCode::EmptyList, "mean of zero histograms");
  }
  const auto edges = histograms.front().edges();
  const std::size_t bins = histograms.front().bins();
  for (const Histogram &h : histograms) {
    if (!h.normalized()) {
      throw Error(ErrorCode::NotNormalized,
                  "mean_histogram expects normalized inputs");
    }
    if (!std::equal(edges.begin(), edges.end(), h.edges().begin(),
                    h.edges().end())) {
      throw Error(ErrorCode::EdgesMismatch,
                  "histograms must share identical edges");
    }
  }

  // Summing each bin in sorted order makes the result exactly independent of
  // input order.
  std::vector<double> mean(bins);
  std::vector<double> column(histograms.size());
  for (std::size_t b = 0; b < bins; ++b) {
    for (std::size_t k = 0; k < histograms.size(); ++k) {
      column[k] = histograms[k].counts()[b];
    }
    std::sort(column.begin(), column.end());
    mean[b] = std::accumulate(column.begin(), column.end(), 0.0) /
              static_cast<double>(histograms.size());
  }
  const double t = std::accumulate(mean.begin(), mean.end(), 0.0);
  for (double &x : mean) x /= t;
  return Histogram(std::vector<double>(edges.begin(), edges.end()),
                   std::move(mean), true);
}

}  // namespace flairnorm
