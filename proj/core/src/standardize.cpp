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
#include "flairnorm/standardize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "flairnorm/error.hpp"

namespace flairnorm {

namespace {

std::string unit_for(Method m) {
  return "standardized:" + std::string(to_string(m));
}

std::vector<double> sorted_masked(const Volume &volume, const Mask &mask) {
  std::vector<double> v = masked_values(volume, mask);
  std::sort(v.begin(), v.end());
  return v;
}

Volume affine_map(const Volume &volume, double shift, double scale,
                  Method tag) {
  const auto in = volume.voxels();
  std::vector<double> out(in.size());
  std::transform(in.begin(), in.end(), out.begin(),
                 [=](double v) { return (v - shift) / scale; });
  return volume.with_voxels(std::move(out), unit_for(tag));
}

void require_strictly_increasing(std::span<const double> v, ErrorCode code,
                                 const char *what) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) {
      throw Error(code, std::string(what) + " must be strictly increasing");
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------

ModeEstimate find_histogram_mode(const Histogram &hist, std::size_t smooth_bins) {
  if (smooth_bins == 0 || smooth_bins % 2 == 0) {
    throw Error(ErrorCode::InvalidArgument, "smoothing window must be odd");
  }
  if (!(hist.total() > 0.0)) {
    throw Error(ErrorCode::DegenerateHistogram, "histogram has no mass");
  }
  const auto counts = hist.counts();
  const std::size_t bins = counts.size();
  const std::size_t half = smooth_bins / 2;

  std::vector<double> smooth(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(bins - 1, i + half);
    double acc = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) acc += counts[j];
    smooth[i] = acc / static_cast<double>(hi - lo + 1);
  }

  const double guard = hist.lo() + kModeBackgroundGuard * (hist.hi() - hist.lo());
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < bins; ++i) {
    if (hist.bin_center(i) < guard) continue;
    if (!best) {
      best = i;
      continue;
    }
    // A flat smoothed plateau is resolved by the raw counts, then upward.
    const double s = smooth[i], sb = smooth[*best];
    if (s > sb || (s == sb && counts[i] >= counts[*best])) best = i;
  }
  if (!best || !(smooth[*best] > 0.0)) {
    throw Error(ErrorCode::ModeNotFound,
                "no histogram mass above the background guard");
  }
  return ModeEstimate{hist.bin_center(*best), *best, smooth_bins};
}

ModeEstimate volume_mode(const Volume &volume, const Mask &mask,
                         std::size_t bins, std::size_t smooth_bins) {
  Histogram h = [&] {
    try {
      return compute_histogram(volume, mask, bins);
    } catch (const Error &e) {
      if (e.code() == ErrorCode::DegenerateRange) {
        throw Error(ErrorCode::ModeNotFound, "constant in-mask intensities");
      }
      throw;
    }
  }();
  return find_histogram_mode(h, smooth_bins);
}

// ---------------------------------------------------------------------------

Volume zscore_normalize(const Volume &volume, const Mask &mask) {
  const MaskedStats s = masked_stats(volume, mask);
  if (!(s.std > 0.0)) {
    throw Error(ErrorCode::ZeroVariance, "z-score of a constant region");
  }
  return affine_map(volume, s.mean, s.std, Method::ZScore);
}

WhiteStripe find_white_stripe(const Volume &volume, const Mask &mask,
                              const WhiteStripeOptions &options) {
  if (!(options.tau > 0.0) || !(options.tau < 0.5)) {
    throw Error(ErrorCode::InvalidArgument, "tau must lie in (0, 0.5)");
  }
  WhiteStripe ws;
  ws.mode = volume_mode(volume, mask, options.bins, options.smooth_bins);

  const std::vector<double> s = sorted_masked(volume, mask);
  const auto n = s.size();
  const double nd = static_cast<double>(n);
  ws.cdf_at_mode =
      static_cast<double>(std::upper_bound(s.begin(), s.end(), ws.mode.mode_intensity) -
                          s.begin()) / nd;

  double a = ws.cdf_at_mode - options.tau;
  double b = ws.cdf_at_mode + options.tau;
  if (a < 0.0) {
    b -= a;
    a = 0.0;
  }
  if (b > 1.0) {
    a = std::max(0.0, a - (b - 1.0));
    b = 1.0;
  }
  ws.quantile_lo = a;
  ws.quantile_hi = b;

  // Rank r carries quantile r / (n - 1).
  constexpr double kSlack = 1e-9;
  const double last = nd - 1.0;
  const auto i0 = static_cast<std::size_t>(std::max(0.0, std::ceil(a * last - kSlack)));
  const auto i1 = static_cast<std::size_t>(std::min(last, std::floor(b * last + kSlack)));
  if (i1 <= i0) {
    throw Error(ErrorCode::ZeroVariance, "white stripe holds fewer than 2 voxels");
  }
  ws.value_lo = s[i0];
  ws.value_hi = s[i1];
  ws.count = i1 - i0 + 1;

  double sum = 0.0;
  for (std::size_t i = i0; i <= i1; ++i) sum += s[i];
  ws.mean = sum / static_cast<double>(ws.count);
  double ss = 0.0;
  for (std::size_t i = i0; i <= i1; ++i) ss += (s[i] - ws.mean) * (s[i] - ws.mean);
  ws.std = std::sqrt(ss / static_cast<double>(ws.count));
  if (!(ws.std > 0.0)) {
    throw Error(ErrorCode::ZeroVariance, "white stripe is constant");
  }
  return ws;
}

Volume whitestripe_normalize(const Volume &volume, const Mask &mask,
                             const WhiteStripeOptions &options) {
  const WhiteStripe ws = find_white_stripe(volume, mask, options);
  return affine_map(volume, ws.mean, ws.std, Method::WhiteStripe);
}

// ---------------------------------------------------------------------------

StandardScale StandardScale::default_template() {
  StandardScale s;
  s.landmark_percentiles = {1, 10, 20, 30, 40, 50, 60, 70, 80, 90, 99};
  s.range_lo = 0.0;
  s.range_hi = 100.0;
  return s;
}

void StandardScale::validate_template() const {
  if (landmark_percentiles.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "need at least 2 landmarks");
  }
  require_strictly_increasing(landmark_percentiles, ErrorCode::InvalidArgument,
                              "landmark percentiles");
  if (landmark_percentiles.front() < 0.0 || landmark_percentiles.back() > 100.0) {
    throw Error(ErrorCode::InvalidArgument, "percentiles must lie in [0, 100]");
  }
  if (!(range_lo < range_hi)) {
    throw Error(ErrorCode::InvalidArgument, "standard range must be increasing");
  }
}

void StandardScale::validate() const {
  validate_template();
  if (standard_positions.size() != landmark_percentiles.size()) {
    throw Error(ErrorCode::InvalidArgument,
                "standard positions and percentiles differ in length");
  }
  require_strictly_increasing(standard_positions, ErrorCode::NonMonotoneLandmarks,
                              "standard positions");
  if (standard_positions.front() < range_lo || standard_positions.back() > range_hi) {
    throw Error(ErrorCode::InvalidArgument,
                "standard positions fall outside the standard range");
  }
}

std::string to_json(const StandardScale &scale) {
  nlohmann::ordered_json j;
  j["landmark_percentiles"] = scale.landmark_percentiles;
  j["standard_positions"] = scale.standard_positions;
  j["range"] = {scale.range_lo, scale.range_hi};
  return j.dump(2) + "\n";
}

StandardScale scale_from_json(std::string_view text) {
  StandardScale s;
  try {
    const auto j = nlohmann::json::parse(text);
    s.landmark_percentiles = j.at("landmark_percentiles").get<std::vector<double>>();
    s.standard_positions = j.at("standard_positions").get<std::vector<double>>();
    const auto r = j.at("range").get<std::vector<double>>();
    if (r.size() != 2) {
      throw Error(ErrorCode::InvalidArgument, "range must have two entries");
    }
    s.range_lo = r[0];
    s.range_hi = r[1];
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::InvalidArgument,
                std::string("malformed standard scale: ") + e.what());
  }
  s.validate();
  return s;
}

double sorted_percentile(std::span<const double> sorted, double percent) {
  if (sorted.empty()) throw Error(ErrorCode::EmptyMask, "percentile of nothing");
  const double pos = percent / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto k = static_cast<std::size_t>(std::floor(pos));
  if (k + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(k);
  return sorted[k] + frac * (sorted[k + 1] - sorted[k]);
}

std::vector<double> masked_percentiles(const Volume &volume, const Mask &mask,
                                       std::span<const double> percentiles) {
  const std::vector<double> s = sorted_masked(volume, mask);
  if (s.empty()) throw Error(ErrorCode::EmptyMask, "percentiles of an empty mask");
  std::vector<double> out(percentiles.size());
  std::transform(percentiles.begin(), percentiles.end(), out.begin(),
                 [&](double p) { return sorted_percentile(s, p); });
  return out;
}

StandardScale nyul_train(std::span<const NyulSample> samples,
                         const StandardScale &config) {
  config.validate_template();
  if (samples.empty()) {
    throw Error(ErrorCode::EmptyTrainingSet, "nyul_train needs a volume");
  }
  const std::size_t k = config.landmark_percentiles.size();
  const double span = config.range_hi - config.range_lo;

  // mapped[landmark][sample]
  std::vector<std::vector<double>> mapped(k, std::vector<double>(samples.size()));
  for (std::size_t v = 0; v < samples.size(); ++v) {
    const auto lm = masked_percentiles(samples[v].volume, samples[v].mask,
                                       config.landmark_percentiles);
    const double width = lm.back() - lm.front();
    if (!(width > 0.0)) {
      throw Error(ErrorCode::ZeroSpread, "training volume has no intensity spread");
    }
    for (std::size_t i = 0; i < k; ++i) {
      mapped[i][v] = config.range_lo + (lm[i] - lm.front()) / width * span;
    }
  }

  StandardScale out = config;
  out.standard_positions.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    // Sorted summation: the average is independent of sample order.
    std::sort(mapped[i].begin(), mapped[i].end());
    out.standard_positions[i] =
        std::accumulate(mapped[i].begin(), mapped[i].end(), 0.0) /
        static_cast<double>(samples.size());
  }
  require_strictly_increasing(out.standard_positions,
                              ErrorCode::NonMonotoneLandmarks,
                              "averaged standard positions");
  return out;
}

Volume nyul_apply(const Volume &volume, const Mask &mask,
                  const StandardScale &scale) {
  scale.validate();
  const auto lm = masked_percentiles(volume, mask, scale.landmark_percentiles);
  if (!(lm.back() > lm.front())) {
    throw Error(ErrorCode::ZeroSpread, "volume has no intensity spread");
  }

  // Knots with repeated source landmarks collapsed (plateaus in the data).
  std::vector<double> src, dst;
  for (std::size_t i = 0; i < lm.size(); ++i) {
    if (!src.empty() && lm[i] <= src.back()) continue;
    src.push_back(lm[i]);
    dst.push_back(scale.standard_positions[i]);
  }

  const std::size_t last = src.size() - 1;
  auto map = [&](double v) {
    std::size_t seg;
    if (v <= src.front()) {
      seg = 0;
    } else if (v >= src.back()) {
      seg = last - 1;
    } else {
      seg = static_cast<std::size_t>(std::upper_bound(src.begin(), src.end(), v) -
                                     src.begin()) - 1;
    }
    const double slope = (dst[seg + 1] - dst[seg]) / (src[seg + 1] - src[seg]);
    return dst[seg] + (v - src[seg]) * slope;
  };

  const auto in = volume.voxels();
  std::vector<double> out(in.size());
  std::transform(in.begin(), in.end(), out.begin(), map);
  return volume.with_voxels(std::move(out), unit_for(Method::Nyul));
}

// ---------------------------------------------------------------------------

Volume iamlab_normalize(const Volume &volume, const Mask &mask,
                        const IamlabOptions &options) {
  if (!(options.reference_mode > 0.0)) {
    throw Error(ErrorCode::NonPositiveMode, "reference mode must be positive");
  }
  const ModeEstimate m = volume_mode(volume, mask, options.bins, options.smooth_bins);
  if (!(m.mode_intensity > 0.0)) {
    throw Error(ErrorCode::NonPositiveMode,
                "detected mode " + std::to_string(m.mode_intensity) +
                    " is not positive");
  }
  const double factor = options.reference_mode / m.mode_intensity;
  const auto in = volume.voxels();
  std::vector<double> out(in.size());
  std::transform(in.begin(), in.end(), out.begin(),
                 [factor](double v) { return v * factor; });
  return volume.with_voxels(std::move(out), unit_for(Method::Iamlab));
}

// ---------------------------------------------------------------------------

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::Original: return "original";
    case Method::ZScore: return "zscore";
    case Method::WhiteStripe: return "whitestripe";
    case Method::Nyul: return "nyul";
    case Method::Iamlab: return "iamlab";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::Original, Method::ZScore, Method::WhiteStripe,
                   Method::Nyul, Method::Iamlab}) {
    if (name == to_string(m)) return m;
  }
  throw Error(ErrorCode::InvalidArgument,
              "unknown method '" + std::string(name) + "'");
}

Volume run_pipeline(const Volume &volume, const Mask &mask, Method method,
                    const PipelineParams &params) {
  require_same_dims(volume.dims(), mask.dims(), "run_pipeline");
  switch (method) {
    case Method::Original:
      return volume;
    case Method::ZScore:
      return zscore_normalize(volume, mask);
    case Method::WhiteStripe:
      return whitestripe_normalize(volume, mask,
                                   {params.tau, params.bins, params.smooth_bins});
    case Method::Nyul:
      if (!params.scale) {
        throw Error(ErrorCode::MissingParams, "nyul needs a trained standard scale");
      }
      return nyul_apply(volume, mask, *params.scale);
    case Method::Iamlab: {
      const Volume denoised = median_filter_3x3(volume);
      const Volume corrected = bias_correct(denoised, mask, params.sigma_mm);
      return iamlab_normalize(corrected, mask,
                              {params.reference_mode, params.bins, params.smooth_bins});
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown method");
}

}  // namespace flairnorm
