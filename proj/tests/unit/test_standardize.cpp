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
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "flairnorm/standardize.hpp"
#include "expect_error.hpp"
#include "phantoms.hpp"

using namespace flairnorm;
using flairnorm::testing::code_of;
using flairnorm::testing::constant_volume;
using flairnorm::testing::gaussian_volume;
using flairnorm::testing::make_brain_phantom;
using flairnorm::testing::Phantom;

namespace {

// Percentile by full sort and linear interpolation between order statistics.
double percentile_oracle(std::vector<double> v, double pct) {
  std::sort(v.begin(), v.end());
  const double pos = pct / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::vector<double> mapped_landmarks(const Volume &v, const Mask &m) {
  auto tmpl = StandardScale::default_template();
  auto values = masked_values(v, m);
  std::vector<double> p;
  for (double pct : tmpl.landmark_percentiles) p.push_back(percentile_oracle(values, pct));
  std::vector<double> out;
  for (double x : p)
    out.push_back(tmpl.range_lo +
                  (x - p.front()) / (p.back() - p.front()) * (tmpl.range_hi - tmpl.range_lo));
  return out;
}

Volume scaled(const Volume &v, double a, double b = 0.0) {
  std::vector<double> out(v.voxels().begin(), v.voxels().end());
  for (double &x : out) x = a * x + b;
  return v.with_voxels(out, v.intensity_unit());
}

Volume large_gaussian(double mean, double sd, std::uint64_t seed) {
  return gaussian_volume({50, 50, 40}, mean, sd, seed);
}

}  // namespace

TEST(Mode, SingleSpike) {
  auto edges = uniform_edges(0, 100, 100);
  std::vector<double> c(100, 0.0);
  c[63] = 50;
  Histogram h(edges, c, false);
  auto m = find_histogram_mode(h);
  EXPECT_EQ(m.peak_bin, 63u);
  EXPECT_DOUBLE_EQ(m.mode_intensity, h.bin_center(63));
  EXPECT_EQ(find_histogram_mode(h, 1).peak_bin, 63u);
}

TEST(Mode, TieGoesToHigherIntensity) {
  auto edges = uniform_edges(0, 100, 100);
  std::vector<double> c(100, 0.0);
  c[30] = 20;
  c[70] = 20;
  Histogram h(edges, c, false);
  EXPECT_EQ(find_histogram_mode(h).peak_bin, 70u);
  EXPECT_EQ(find_histogram_mode(h, 1).peak_bin, 70u);
}

TEST(Mode, IgnoresBackgroundSpike) {
  auto edges = uniform_edges(0, 100, 100);
  std::vector<double> c(100, 1.0);
  c[0] = 1000;
  c[55] = 30;
  Histogram h(edges, c, false);
  EXPECT_EQ(find_histogram_mode(h, 1).peak_bin, 55u);
}

TEST(Mode, GaussianSamples) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> n(100, 10);
  std::vector<double> v(100000);
  for (double &x : v) x = n(rng);
  Volume vol({100000, 1, 1}, {}, v);
  auto h = compute_histogram(vol, full_mask(vol.dims()), 100);
  auto m = find_histogram_mode(h);
  const double width = h.edges()[1] - h.edges()[0];
  EXPECT_NEAR(m.mode_intensity, 100.0, 2 * width);
}

TEST(Mode, Errors) {
  auto edges = uniform_edges(0, 1, 4);
  Histogram zero(edges, {0, 0, 0, 0}, false);
  EXPECT_EQ(code_of([&] { find_histogram_mode(zero); }), ErrorCode::DegenerateHistogram);
  Histogram h(edges, {0, 1, 2, 1}, false);
  EXPECT_EQ(code_of([&] { find_histogram_mode(h, 4); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { volume_mode(constant_volume({3, 3, 3}, 5), full_mask({3, 3, 3})); }),
            ErrorCode::ModeNotFound);
}

TEST(ZScore, ThreeValues) {
  Volume v({3, 1, 1}, {}, {1, 2, 3});
  auto out = zscore_normalize(v, full_mask(v.dims()));
  EXPECT_NEAR(out.voxels()[0], -1.224744871391589, 1e-12);
  EXPECT_NEAR(out.voxels()[1], 0.0, 1e-12);
  EXPECT_NEAR(out.voxels()[2], 1.224744871391589, 1e-12);
  EXPECT_EQ(out.intensity_unit(), "standardized:zscore");
}

TEST(ZScore, IdempotentAndAppliesOutsideMask) {
  auto p = make_brain_phantom({});
  auto once = zscore_normalize(p.volume, p.brain);
  auto twice = zscore_normalize(once, p.brain);
  for (std::size_t i = 0; i < once.voxels().size(); ++i)
    EXPECT_NEAR(once.voxels()[i], twice.voxels()[i], 1e-9);
  auto s = masked_stats(p.volume, p.brain);
  EXPECT_NEAR(once.voxels()[0], (p.volume.voxels()[0] - s.mean) / s.std, 1e-12);
}

TEST(ZScore, ConstantRegion) {
  auto v = constant_volume({4, 4, 4}, 3.0);
  EXPECT_EQ(code_of([&] { zscore_normalize(v, full_mask(v.dims())); }), ErrorCode::ZeroVariance);
}

TEST(WhiteStripe, StripeIsStandardizedOnGaussian) {
  auto v = large_gaussian(300, 25, 4);
  auto m = full_mask(v.dims());
  auto ws = find_white_stripe(v, m);
  auto out = whitestripe_normalize(v, m);
  std::vector<double> stripe;
  for (std::size_t i = 0; i < v.voxels().size(); ++i) {
    const double x = v.voxels()[i];
    if (x >= ws.value_lo && x <= ws.value_hi) stripe.push_back(out.voxels()[i]);
  }
  ASSERT_EQ(stripe.size(), ws.count);
  double mean = 0, sq = 0;
  for (double x : stripe) mean += x;
  mean /= stripe.size();
  for (double x : stripe) sq += (x - mean) * (x - mean);
  EXPECT_NEAR(mean, 0.0, 1e-6);
  EXPECT_NEAR(std::sqrt(sq / stripe.size()), 1.0, 1e-6);
  EXPECT_NEAR(ws.quantile_hi - ws.quantile_lo, 0.1, 1e-3);
  EXPECT_NEAR(ws.count / static_cast<double>(v.voxels().size()), 0.1, 1e-3);
}

TEST(WhiteStripe, PicksDominantPeak) {
  auto p = make_brain_phantom({});
  auto ws = find_white_stripe(p.volume, p.brain);
  EXPECT_NEAR(ws.mode.mode_intensity, 300.0, 15.0);
  EXPECT_GT(ws.mean, 250.0);
}

TEST(WhiteStripe, WideTauConvergesToZScore) {
  auto v = large_gaussian(120, 15, 8);
  auto m = full_mask(v.dims());
  auto ws = whitestripe_normalize(v, m, {.tau = 0.49999});
  auto zs = zscore_normalize(v, m);
  double worst = 0;
  for (std::size_t i = 0; i < v.voxels().size(); ++i)
    worst = std::max(worst, std::abs(ws.voxels()[i] - zs.voxels()[i]));
  EXPECT_LT(worst, 1e-3);
}

TEST(WhiteStripe, WindowSlidesInsideUnitInterval) {
  // Exponential-like data puts the mode near the bottom of the distribution.
  std::mt19937_64 rng(2);
  std::exponential_distribution<double> e(0.05);
  std::vector<double> vox(40000);
  for (double &x : vox) x = 10.0 + e(rng);
  Volume v({40000, 1, 1}, {}, vox);
  auto ws = find_white_stripe(v, full_mask(v.dims()), {.tau = 0.2});
  EXPECT_GE(ws.quantile_lo, 0.0);
  EXPECT_LE(ws.quantile_hi, 1.0);
  EXPECT_NEAR(ws.quantile_hi - ws.quantile_lo, 0.4, 1e-9);
}

TEST(Nyul, SingleVolumeGivesItsMappedLandmarks) {
  auto p = make_brain_phantom({});
  std::vector<NyulSample> s{{p.volume, p.brain}};
  auto scale = nyul_train(s);
  auto want = mapped_landmarks(p.volume, p.brain);
  ASSERT_EQ(scale.standard_positions.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i)
    EXPECT_NEAR(scale.standard_positions[i], want[i], 1e-9);
  EXPECT_EQ(scale.standard_positions.front(), 0.0);
  EXPECT_EQ(scale.standard_positions.back(), 100.0);
}

TEST(Nyul, DuplicatesAndScaledCopies) {
  auto p = make_brain_phantom({});
  auto v2 = scaled(p.volume, 2.0);
  std::vector<NyulSample> one{{p.volume, p.brain}};
  std::vector<NyulSample> dup{{p.volume, p.brain}, {p.volume, p.brain}};
  std::vector<NyulSample> pair{{p.volume, p.brain}, {v2, p.brain}};
  auto a = nyul_train(one), b = nyul_train(dup), c = nyul_train(pair);
  for (std::size_t i = 0; i < a.standard_positions.size(); ++i) {
    EXPECT_NEAR(a.standard_positions[i], b.standard_positions[i], 1e-9);
    EXPECT_NEAR(a.standard_positions[i], c.standard_positions[i], 1e-9);
  }
}

TEST(Nyul, TrainingIsOrderIndependent) {
  std::vector<Phantom> ps;
  for (std::uint64_t s = 1; s <= 4; ++s)
    ps.push_back(make_brain_phantom({.gain = 0.5 + s * 0.3, .seed = s}));
  std::vector<NyulSample> fwd, rev;
  for (auto &p : ps) fwd.push_back({p.volume, p.brain});
  for (auto it = ps.rbegin(); it != ps.rend(); ++it) rev.push_back({it->volume, it->brain});
  EXPECT_EQ(nyul_train(fwd), nyul_train(rev));
}

TEST(Nyul, ApplyIsIdentityOnStandardVolume) {
  auto p = make_brain_phantom({});
  std::vector<NyulSample> s{{p.volume, p.brain}};
  auto scale = nyul_train(s);
  auto values = masked_values(p.volume, p.brain);
  const double p1 = percentile_oracle(values, 1), p99 = percentile_oracle(values, 99);
  auto standard = scaled(p.volume, 100.0 / (p99 - p1), -100.0 * p1 / (p99 - p1));
  auto out = nyul_apply(standard, p.brain, scale);
  for (std::size_t i = 0; i < out.voxels().size(); ++i)
    ASSERT_NEAR(out.voxels()[i], standard.voxels()[i], 1e-9);
}

TEST(Nyul, ApplyHitsLandmarksAndIsMonotone) {
  std::vector<Phantom> ps;
  for (std::uint64_t s = 1; s <= 3; ++s)
    ps.push_back(make_brain_phantom({.gain = 0.6 * s, .offset = 5.0 * s, .seed = 10 + s}));
  std::vector<NyulSample> samples;
  for (auto &p : ps) samples.push_back({p.volume, p.brain});
  auto scale = nyul_train(samples);
  auto target = make_brain_phantom({.gain = 1.7, .offset = -12, .seed = 99});
  auto out = nyul_apply(target.volume, target.brain, scale);
  auto got = masked_percentiles(out, target.brain, scale.landmark_percentiles);
  auto h = compute_histogram(out, target.brain);
  const double width = h.edges()[1] - h.edges()[0];
  for (std::size_t i = 0; i < got.size(); ++i)
    EXPECT_NEAR(got[i], scale.standard_positions[i], width);
  std::vector<std::pair<double, double>> io;
  for (std::size_t i = 0; i < out.voxels().size(); ++i)
    io.emplace_back(target.volume.voxels()[i], out.voxels()[i]);
  std::sort(io.begin(), io.end());
  for (std::size_t i = 1; i < io.size(); ++i) ASSERT_LE(io[i - 1].second, io[i].second);
}

TEST(Nyul, Errors) {
  EXPECT_EQ(code_of([] { nyul_train(std::span<const NyulSample>{}); }),
            ErrorCode::EmptyTrainingSet);
  auto c = constant_volume({4, 4, 4}, 2.0);
  auto m = full_mask(c.dims());
  std::vector<NyulSample> s{{c, m}};
  EXPECT_EQ(code_of([&] { nyul_train(s); }), ErrorCode::ZeroSpread);
  auto tmpl = StandardScale::default_template();
  tmpl.landmark_percentiles[3] = tmpl.landmark_percentiles[2];
  auto p = make_brain_phantom({});
  std::vector<NyulSample> ok{{p.volume, p.brain}};
  EXPECT_EQ(code_of([&] { nyul_train(ok, tmpl); }), ErrorCode::InvalidArgument);
  // Half the voxels share one value, so p10..p40 coincide.
  std::vector<double> tied(1000);
  for (std::size_t i = 0; i < tied.size(); ++i) tied[i] = i < 500 ? 5.0 : static_cast<double>(i);
  Volume tv({1000, 1, 1}, {}, tied);
  auto tm = full_mask(tv.dims());
  std::vector<NyulSample> ts{{tv, tm}};
  EXPECT_EQ(code_of([&] { nyul_train(ts); }), ErrorCode::NonMonotoneLandmarks);
  auto scale = nyul_train(ok);
  EXPECT_EQ(code_of([&] { nyul_apply(c, m, scale); }), ErrorCode::ZeroSpread);
}

TEST(Nyul, ScaleJsonRoundTrip) {
  auto p = make_brain_phantom({});
  std::vector<NyulSample> s{{p.volume, p.brain}};
  auto scale = nyul_train(s);
  auto json = to_json(scale);
  EXPECT_NE(json.find("\"landmark_percentiles\""), std::string::npos);
  EXPECT_NE(json.find("\"range\""), std::string::npos);
  EXPECT_EQ(scale_from_json(json), scale);
  EXPECT_EQ(to_json(scale_from_json(json)), json);
  EXPECT_ANY_THROW(scale_from_json("{\"range\": [0, 100]}"));
}

TEST(Percentiles, MatchSortOracle) {
  auto v = gaussian_volume({13, 11, 7}, 0, 1, 5);
  auto m = full_mask(v.dims());
  std::vector<double> pcts{0, 1, 12.5, 50, 99, 100};
  auto got = masked_percentiles(v, m, pcts);
  auto values = masked_values(v, m);
  for (std::size_t i = 0; i < pcts.size(); ++i)
    EXPECT_DOUBLE_EQ(got[i], percentile_oracle(values, pcts[i]));
}

TEST(Iamlab, ReferenceModeInputIsUnchanged) {
  auto base = large_gaussian(200, 20, 12);
  auto m = full_mask(base.dims());
  const double mode = volume_mode(base, m).mode_intensity;
  auto out = iamlab_normalize(base, m, {.reference_mode = mode});
  for (std::size_t i = 0; i < out.voxels().size(); ++i)
    ASSERT_EQ(out.voxels()[i], base.voxels()[i]);
}

TEST(Iamlab, HalvesMode200ToReference100) {
  auto v = large_gaussian(200, 20, 13);
  auto m = full_mask(v.dims());
  auto h = compute_histogram(v, m);
  const double width = h.edges()[1] - h.edges()[0];
  auto out = iamlab_normalize(v, m, {.reference_mode = 100});
  const double factor = out.voxels()[0] / v.voxels()[0];
  EXPECT_GE(factor, 100.0 / (200.0 + width));
  EXPECT_LE(factor, 100.0 / (200.0 - width));
  for (std::size_t i = 0; i < out.voxels().size(); ++i)
    ASSERT_NEAR(out.voxels()[i], factor * v.voxels()[i], 1e-9 * std::abs(v.voxels()[i]));
  auto oh = compute_histogram(out, m);
  EXPECT_NEAR(volume_mode(out, m).mode_intensity, 100.0, oh.edges()[1] - oh.edges()[0]);
}

TEST(Iamlab, NonPositiveMode) {
  auto v = gaussian_volume({30, 30, 30}, -100, 5, 3);
  EXPECT_EQ(code_of([&] { iamlab_normalize(v, full_mask(v.dims())); }),
            ErrorCode::NonPositiveMode);
}

TEST(Pipeline, OriginalIsPassThrough) {
  auto p = make_brain_phantom({});
  auto out = run_pipeline(p.volume, p.brain, Method::Original);
  ASSERT_EQ(out.voxels().size(), p.volume.voxels().size());
  EXPECT_TRUE(std::equal(out.voxels().begin(), out.voxels().end(), p.volume.voxels().begin()));
  EXPECT_EQ(out.intensity_unit(), p.volume.intensity_unit());
}

TEST(Pipeline, IamlabRemovesImpulse) {
  auto p = make_brain_phantom({.noise = 0.0});
  std::vector<double> vox(p.volume.voxels().begin(), p.volume.voxels().end());
  const auto at = p.volume.dims().index(24, 24, 6);
  ASSERT_TRUE(p.brain.bits()[at]);
  vox[at] = 5000.0;
  auto noisy = p.volume.with_voxels(vox, "arbitrary");
  auto out = run_pipeline(noisy, p.brain, Method::Iamlab);
  double neighbours = 0;
  for (int d : {-1, 1}) neighbours += out.at(24 + d, 24, 6) + out.at(24, 24 + d, 6);
  EXPECT_NEAR(out.voxels()[at], neighbours / 4, 0.1 * neighbours / 4);
  EXPECT_EQ(out.intensity_unit(), "standardized:iamlab");
}

TEST(Pipeline, NyulNeedsScale) {
  auto p = make_brain_phantom({});
  EXPECT_EQ(code_of([&] { run_pipeline(p.volume, p.brain, Method::Nyul); }),
            ErrorCode::MissingParams);
}

TEST(Pipeline, MethodNames) {
  for (auto m : {Method::Original, Method::ZScore, Method::WhiteStripe, Method::Nyul,
                 Method::Iamlab})
    EXPECT_EQ(parse_method(to_string(m)), m);
  EXPECT_EQ(code_of([] { parse_method("n4"); }), ErrorCode::InvalidArgument);
}
