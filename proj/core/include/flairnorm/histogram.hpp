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

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "flairnorm/volume.hpp"

namespace flairnorm {

inline constexpr std::size_t kDefaultBins = 256;

/// Binned intensity distribution. `edges` has one more entry than `counts`.
class Histogram {
 public:
  Histogram(std::vector<double> edges, std::vector<double> counts,
            bool normalized);

  std::span<const double> edges() const noexcept { return edges_; }
  std::span<const double> counts() const noexcept { return counts_; }
  bool normalized() const noexcept { return normalized_; }
  std::size_t bins() const noexcept { return counts_.size(); }
  double lo() const noexcept { return edges_.front(); }
  double hi() const noexcept { return edges_.back(); }
  double bin_center(std::size_t i) const noexcept {
    return 0.5 * (edges_[i] + edges_[i + 1]);
  }
  double total() const noexcept;

  /// Copy whose counts sum to 1. Throws EmptyMask when the total is zero.
  Histogram to_normalized() const;

 private:
  std::vector<double> edges_;
  std::vector<double> counts_;
  bool normalized_;
};

/// `bins + 1` equally spaced edges over [lo, hi]; the last edge is exactly hi.
std::vector<double> uniform_edges(double lo, double hi, std::size_t bins);

/// Bin index of `v` for the given edges, or nullopt if v lies outside
/// [edges.front(), edges.back()]. The upper boundary belongs to the last bin.
std::optional<std::size_t> bin_index(std::span<const double> edges, double v);

using Range = std::pair<double, double>;

/// Counts in-mask voxels in [lo, hi]. With no range given, the masked
/// min/max are used and a constant region raises DegenerateRange.
Histogram compute_histogram(const Volume &volume, const Mask &mask,
                            std::size_t bins = kDefaultBins,
                            std::optional<Range> range = std::nullopt);

/// Per-bin arithmetic mean of normalized histograms sharing identical edges.
/// The result does not depend on the order of the inputs.
Histogram mean_histogram(std::span<const Histogram> histograms);

}  // namespace flairnorm
