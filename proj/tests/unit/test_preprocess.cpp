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

#include <cmath>
#include <random>

#include "flairnorm/preprocess.hpp"
#include "expect_error.hpp"
#include "oracles.hpp"
#include "phantoms.hpp"

using namespace flairnorm;
using flairnorm::testing::code_of;
using flairnorm::testing::constant_volume;
using flairnorm::testing::uniform_volume;

namespace {

double cov(const Volume &v, const Mask &m) {
  auto s = masked_stats(v, m);
  return s.std / s.mean;
}

}  // namespace

TEST(Median, ConstantUnchanged) {
  auto v = constant_volume({6, 5, 3}, 42.0);
  auto out = median_filter_3x3(v);
  for (double x : out.voxels()) EXPECT_EQ(x, 42.0);
}

TEST(Median, RemovesImpulse) {
  auto v0 = constant_volume({7, 7, 2}, 10.0);
  std::vector<double> vox(v0.voxels().begin(), v0.voxels().end());
  vox[v0.dims().index(3, 3, 1)] = 5000.0;
  vox[v0.dims().index(0, 0, 0)] = 5000.0;
  auto out = median_filter_3x3(v0.with_voxels(vox, "arbitrary"));
  for (double x : out.voxels()) EXPECT_EQ(x, 10.0);
}

TEST(Median, MatchesSortOracle) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto v = uniform_volume({8, 8, 3}, -5, 5, seed);
    auto out = median_filter_3x3(v);
    auto want = oracle::median3x3(v);
    for (std::size_t i = 0; i < want.size(); ++i) ASSERT_EQ(out.voxels()[i], want[i]);
  }
}

TEST(Median, PreservesGeometryAndRejectsTinySlices) {
  auto v = uniform_volume({4, 3, 2}, 0, 1, 3, {0.5, 0.7, 2.0});
  auto out = median_filter_3x3(v);
  EXPECT_EQ(out.dims(), v.dims());
  EXPECT_EQ(out.spacing(), v.spacing());
  EXPECT_EQ(code_of([] { median_filter_3x3(constant_volume({2, 8, 1}, 1)); }),
            ErrorCode::TooSmall);
}

TEST(BiasCorrect, ConstantStaysConstant) {
  auto v = constant_volume({10, 10, 4}, 250.0, {2, 2, 3});
  auto out = bias_correct(v, full_mask(v.dims()), 20.0);
  for (double x : out.voxels()) EXPECT_NEAR(x, 250.0, 1e-9);
}

TEST(BiasCorrect, FlattensSmoothRamp) {
  const Dims d{64, 64, 4};
  std::vector<double> vox(d.count());
  for (std::size_t z = 0; z < d.nz; ++z)
    for (std::size_t y = 0; y < d.ny; ++y)
      for (std::size_t x = 0; x < d.nx; ++x)
        vox[d.index(x, y, z)] = 300.0 * std::exp(0.6 * (x / 63.0 - 0.5) + 0.3 * (y / 63.0));
  Volume v(d, {1, 1, 3}, vox);
  auto m = full_mask(d);
  auto out = bias_correct(v, m, 5.0);
  EXPECT_LT(cov(out, m), 0.25 * cov(v, m));
}

TEST(BiasCorrect, KeepsGeometricMeanAndBackground) {
  auto p = flairnorm::testing::make_brain_phantom({});
  auto out = bias_correct(p.volume, p.brain, 30.0);
  double lin = 0, lout = 0;
  for (std::size_t i = 0; i < out.voxels().size(); ++i) {
    if (p.brain.bits()[i]) {
      lin += std::log(p.volume.voxels()[i]);
      lout += std::log(out.voxels()[i]);
    } else {
      EXPECT_EQ(out.voxels()[i], p.volume.voxels()[i]);
    }
  }
  EXPECT_NEAR(lin, lout, 1e-6 * std::abs(lin));
}

TEST(BiasCorrect, Errors) {
  Volume v({3, 3, 1}, {}, {1, 1, 1, 1, 0, 1, 1, 1, 1});
  auto m = full_mask(v.dims());
  EXPECT_EQ(code_of([&] { bias_correct(v, m); }), ErrorCode::NonPositiveIntensity);
  auto c = constant_volume({3, 3, 1}, 1.0);
  Mask empty({3, 3, 1}, std::vector<std::uint8_t>(9, 0), MaskKind::ICV);
  EXPECT_EQ(code_of([&] { bias_correct(c, empty); }), ErrorCode::EmptyMask);
  EXPECT_EQ(code_of([&] { bias_correct(c, m, 0.0); }), ErrorCode::InvalidArgument);
}

TEST(GaussianBlur, PreservesMassAwayFromEdges) {
  const Dims d{31, 31, 1};
  std::vector<double> impulse(d.count(), 0.0);
  impulse[d.index(15, 15, 0)] = 1.0;
  auto out = gaussian_blur(impulse, d, {1, 1, 1}, 2.0);
  double sum = 0;
  for (double x : out) sum += x;
  EXPECT_NEAR(sum, 1.0, 1e-9);
  EXPECT_NEAR(out[d.index(14, 15, 0)], out[d.index(16, 15, 0)], 1e-15);
  EXPECT_NEAR(out[d.index(15, 14, 0)], out[d.index(15, 16, 0)], 1e-15);
  EXPECT_GT(out[d.index(15, 15, 0)], out[d.index(16, 15, 0)]);
}
