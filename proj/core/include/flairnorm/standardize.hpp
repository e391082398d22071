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
#include <string_view>
#include <vector>

#include "flairnorm/histogram.hpp"
#include "flairnorm/preprocess.hpp"
#include "flairnorm/volume.hpp"

namespace flairnorm {

// ---------------------------------------------------------------------------
// Mode detection

inline constexpr std::size_t kDefaultModeSmoothing = 11;

/// Fraction of the histogram range, from the bottom, that mode detection
/// ignores (background guard).
inline constexpr double kModeBackgroundGuard = 0.02;

struct ModeEstimate {
  double mode_intensity = 0.0;
  std::size_t peak_bin = 0;
  std::size_t smoothing_width = 1;
};

/// Global maximum of the moving-average smoothed counts (window `smooth_bins`,
/// odd, truncated at the ends), ignoring bins centred in the bottom 2% of the
/// range. Ties resolve to the higher-intensity bin.
ModeEstimate find_histogram_mode(const Histogram &hist,
                                 std::size_t smooth_bins = kDefaultModeSmoothing);

/// Mode of the full-volume in-mask histogram.
ModeEstimate volume_mode(const Volume &volume, const Mask &mask,
                         std::size_t bins = kDefaultBins,
                         std::size_t smooth_bins = kDefaultModeSmoothing);

// ---------------------------------------------------------------------------
// Z-score and White Stripe

/// (v - mean) / std with in-mask population statistics, applied to every voxel.
Volume zscore_normalize(const Volume &volume, const Mask &mask);

inline constexpr double kDefaultWhiteStripeTau = 0.05;

struct WhiteStripeOptions {
  double tau = kDefaultWhiteStripeTau;
  std::size_t bins = kDefaultBins;
  std::size_t smooth_bins = kDefaultModeSmoothing;
};

/// The stripe selected around the dominant tissue mode.
struct WhiteStripe {
  ModeEstimate mode;
  double cdf_at_mode = 0.0;   // in-mask empirical CDF at the mode
  double quantile_lo = 0.0;   // stripe bounds in quantile space
  double quantile_hi = 0.0;
  double value_lo = 0.0;      // stripe bounds in intensity
  double value_hi = 0.0;
  double mean = 0.0;
  double std = 0.0;
  std::size_t count = 0;
};

/// Locates the stripe: in-mask voxels whose quantile lies in
/// [F(mode) - tau, F(mode) + tau]. A window that would cross 0 or 1 is slid
/// back inside so it always spans 2*tau of the distribution.
WhiteStripe find_white_stripe(const Volume &volume, const Mask &mask,
                              const WhiteStripeOptions &options = {});

/// (v - stripe mean) / stripe std, applied to every voxel.
Volume whitestripe_normalize(const Volume &volume, const Mask &mask,
                             const WhiteStripeOptions &options = {});

// ---------------------------------------------------------------------------
// Nyul piecewise-linear histogram matching

/// Trained landmark set. Percentiles are in percent (1 = p1).
struct StandardScale {
  std::vector<double> landmark_percentiles;
  std::vector<double> standard_positions;
  double range_lo = 0.0;
  double range_hi = 100.0;

  /// p1, p10, p20, ..., p90, p99 on [0, 100] with no positions yet.
  static StandardScale default_template();

  /// Checks the template part (percentiles and range).
  void validate_template() const;
  /// Checks a trained scale, including positions.
  void validate() const;

  friend bool operator==(const StandardScale &, const StandardScale &) = default;
};

/// JSON document {"landmark_percentiles": [...], "standard_positions": [...],
/// "range": [s1, s2]}.
std::string to_json(const StandardScale &scale);
StandardScale scale_from_json(std::string_view json);

/// Percentiles (in percent) of the in-mask intensities, linear interpolation
/// between order statistics.
std::vector<double> masked_percentiles(const Volume &volume, const Mask &mask,
                                       std::span<const double> percentiles);

/// Percentile of already-sorted data, linear interpolation.
double sorted_percentile(std::span<const double> sorted, double percent);

struct NyulSample {
  const Volume &volume;
  const Mask &mask;
};

/// Maps each volume's landmarks affinely so its first/last landmark land on
/// (range_lo, range_hi), then averages landmark-wise across volumes.
StandardScale nyul_train(std::span<const NyulSample> samples,
                         const StandardScale &config = StandardScale::default_template());

/// Piecewise-linear map from the volume's own landmarks onto the standard
/// positions; linear extrapolation beyond the outer landmarks.
Volume nyul_apply(const Volume &volume, const Mask &mask,
                  const StandardScale &scale);

// ---------------------------------------------------------------------------
// IAMLAB mode scaling

inline constexpr double kDefaultReferenceMode = 0.75;

struct IamlabOptions {
  double reference_mode = kDefaultReferenceMode;
  std::size_t bins = kDefaultBins;
  std::size_t smooth_bins = kDefaultModeSmoothing;
};

/// Multiplies the volume by reference_mode / detected mode.
Volume iamlab_normalize(const Volume &volume, const Mask &mask,
                        const IamlabOptions &options = {});

// ---------------------------------------------------------------------------
// Pipeline

enum class Method { Original, ZScore, WhiteStripe, Nyul, Iamlab };

std::string_view to_string(Method method) noexcept;
/// Accepts "original", "zscore", "whitestripe", "nyul", "iamlab".
Method parse_method(std::string_view name);

struct PipelineParams {
  double reference_mode = kDefaultReferenceMode;
  double tau = kDefaultWhiteStripeTau;
  double sigma_mm = kDefaultBiasSigmaMm;
  std::size_t bins = kDefaultBins;
  std::size_t smooth_bins = kDefaultModeSmoothing;
  std::optional<StandardScale> scale;  // required for Nyul
};

/// original: pass-through. iamlab: median 3x3, then bias correction, then
/// mode scaling. zscore / whitestripe / nyul: the normalization alone.
Volume run_pipeline(const Volume &volume, const Mask &mask, Method method,
                    const PipelineParams &params = {});

}  // namespace flairnorm
