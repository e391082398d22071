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

#include <bit>
#include <cstring>
#include <fstream>
#include <random>

#include "flairnorm/nifti.hpp"
#include "expect_error.hpp"
#include "phantoms.hpp"
#include "temp_dir.hpp"

using namespace flairnorm;
using flairnorm::testing::code_of;
using flairnorm::testing::TempDir;

namespace {

const std::filesystem::path kFixtures = FLAIRNORM_FIXTURE_DIR;

std::vector<std::uint8_t> slurp(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const std::filesystem::path &p, const std::vector<std::uint8_t> &bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

Volume random_float32_volume(std::mt19937_64 &rng) {
  std::uniform_int_distribution<std::size_t> extent(1, 9);
  Dims d{extent(rng), extent(rng), extent(rng)};
  std::uniform_real_distribution<double> val(-1e4, 1e4);
  std::vector<double> v(d.count());
  for (double &x : v) x = static_cast<float>(val(rng));
  std::uniform_real_distribution<float> sp(0.3f, 4.0f);
  Spacing s{sp(rng), sp(rng), sp(rng)};
  return Volume(d, s, std::move(v));
}

}  // namespace

TEST(NiftiHeader, EncodeParseRoundTrip) {
  nifti::Header h;
  h.dim = {3, 5, 6, 7, 1, 1, 1, 1};
  h.pixdim = {1, 0.5f, 0.75f, 3.0f, 0, 0, 0, 0};
  h.datatype = nifti::DT_INT16;
  h.bitpix = 16;
  h.scl_slope = 2.0f;
  h.scl_inter = -1.0f;
  auto bytes = nifti::encode_header(h);
  auto back = nifti::parse_header(bytes);
  EXPECT_EQ(back.dim, h.dim);
  EXPECT_EQ(back.pixdim, h.pixdim);
  EXPECT_EQ(back.datatype, h.datatype);
  EXPECT_EQ(back.scl_slope, 2.0f);
  EXPECT_EQ(back.scl_inter, -1.0f);
  EXPECT_EQ(nifti::header_dims(back), (Dims{5, 6, 7}));
  EXPECT_EQ(nifti::header_spacing(back), (Spacing{0.5, 0.75, 3.0}));
}

TEST(NiftiHeader, ZeroPixdimReadsAsOne) {
  nifti::Header h;
  h.dim = {2, 4, 4, 1, 1, 1, 1, 1};
  h.pixdim = {1, 2.0f, 0.0f, 0.0f, 0, 0, 0, 0};
  EXPECT_EQ(nifti::header_spacing(h), (Spacing{2.0, 1.0, 1.0}));
  EXPECT_EQ(nifti::header_dims(h), (Dims{4, 4, 1}));
}

TEST(NiftiRead, BadMagic) {
  TempDir tmp;
  auto bytes = slurp(kFixtures / "crosstool_int16_slope.nii");
  std::memcpy(bytes.data() + 344, "abcd", 4);
  spit(tmp / "bad.nii", bytes);
  EXPECT_EQ(code_of([&] { nifti::read_volume(tmp / "bad.nii"); }), ErrorCode::BadMagic);
}

TEST(NiftiRead, TruncatedPayload) {
  TempDir tmp;
  auto bytes = slurp(kFixtures / "crosstool_int16_slope.nii");
  bytes.resize(bytes.size() - 10);
  spit(tmp / "short.nii", bytes);
  EXPECT_EQ(code_of([&] { nifti::read_volume(tmp / "short.nii"); }),
            ErrorCode::TruncatedData);
  bytes.resize(100);
  spit(tmp / "tiny.nii", bytes);
  EXPECT_ANY_THROW(nifti::read_volume(tmp / "tiny.nii"));
}

TEST(NiftiRead, UnsupportedDatatype) {
  TempDir tmp;
  auto bytes = slurp(kFixtures / "crosstool_int16_slope.nii");
  const std::int16_t complex64 = 32;
  std::memcpy(bytes.data() + 70, &complex64, 2);
  spit(tmp / "cplx.nii", bytes);
  EXPECT_EQ(code_of([&] { nifti::read_volume(tmp / "cplx.nii"); }),
            ErrorCode::UnsupportedDatatype);
}

TEST(NiftiRead, MissingFile) {
  EXPECT_EQ(code_of([] { nifti::read_volume("/nonexistent/x.nii"); }), ErrorCode::IoError);
}

TEST(NiftiRead, CrossToolInt16WithScaling) {
  for (const char *name : {"crosstool_int16_slope.nii", "crosstool_int16_slope.nii.gz"}) {
    auto v = nifti::read_volume(kFixtures / name);
    ASSERT_EQ(v.dims(), (Dims{4, 4, 4})) << name;
    EXPECT_EQ(v.spacing().sx, static_cast<double>(0.8594f));
    EXPECT_EQ(v.spacing().sy, static_cast<double>(0.8594f));
    EXPECT_EQ(v.spacing().sz, 3.0);
    EXPECT_EQ(v.at(0, 0, 0), 7.0);
    EXPECT_EQ(v.at(1, 2, 3), -9.0);
    EXPECT_EQ(v.source_type(), SampleType::Int16);
  }
}

TEST(NiftiRead, CrossToolBigEndianFloat) {
  auto v = nifti::read_volume(kFixtures / "crosstool_bigendian_f32.nii");
  ASSERT_EQ(v.dims(), (Dims{2, 3, 2}));
  for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(v.voxels()[i], 0.5 * i - 1.25);
  EXPECT_EQ(v.spacing().sx, static_cast<double>(1.2f));
  EXPECT_EQ(v.spacing().sz, 5.0);
  EXPECT_TRUE(nifti::read_header(kFixtures / "crosstool_bigendian_f32.nii").big_endian);
}

TEST(NiftiRead, CrossToolMask) {
  auto m = nifti::read_mask(kFixtures / "crosstool_mask_u8.nii.gz", MaskKind::WML);
  ASSERT_EQ(m.dims(), (Dims{5, 4, 3}));
  EXPECT_EQ(m.count(), 5u);
  EXPECT_TRUE(m.at(1, 1, 1));
  EXPECT_TRUE(m.at(2, 2, 1));
  EXPECT_TRUE(m.at(4, 3, 2));
  EXPECT_FALSE(m.at(0, 0, 0));
}

TEST(NiftiRead, NonBinaryMask) {
  EXPECT_EQ(code_of([] {
              nifti::read_mask(kFixtures / "crosstool_int16_slope.nii", MaskKind::WML);
            }),
            ErrorCode::NonBinaryMask);
}

TEST(NiftiWrite, Float32RoundTripIsBitIdentical) {
  TempDir tmp;
  std::mt19937_64 rng(42);
  for (int i = 0; i < 20; ++i) {
    auto v = random_float32_volume(rng);
    for (const char *ext : {".nii", ".nii.gz"}) {
      auto path = tmp / ("v" + std::to_string(i) + ext);
      nifti::write_volume(v, path);
      auto back = nifti::read_volume(path);
      ASSERT_EQ(back.dims(), v.dims());
      EXPECT_EQ(back.spacing(), v.spacing());
      for (std::size_t k = 0; k < v.voxels().size(); ++k)
        ASSERT_EQ(std::bit_cast<std::uint64_t>(back.voxels()[k]),
                  std::bit_cast<std::uint64_t>(v.voxels()[k]));
    }
  }
}

TEST(NiftiWrite, GzipOutputIsDeterministic) {
  TempDir tmp;
  std::mt19937_64 rng(1);
  auto v = random_float32_volume(rng);
  nifti::write_volume(v, tmp / "a.nii.gz");
  nifti::write_volume(v, tmp / "b.nii.gz");
  EXPECT_EQ(slurp(tmp / "a.nii.gz"), slurp(tmp / "b.nii.gz"));
  auto raw = slurp(tmp / "a.nii.gz");
  ASSERT_GE(raw.size(), 2u);
  EXPECT_EQ(raw[0], 0x1f);
  EXPECT_EQ(raw[1], 0x8b);
}

TEST(NiftiWrite, HeaderLayout) {
  TempDir tmp;
  Volume v({2, 2, 2}, {1, 1, 1}, std::vector<double>(8, 1.5));
  nifti::write_volume(v, tmp / "h.nii");
  auto raw = slurp(tmp / "h.nii");
  ASSERT_EQ(raw.size(), 352u + 8 * 4);
  std::int32_t sizeof_hdr;
  std::memcpy(&sizeof_hdr, raw.data(), 4);
  EXPECT_EQ(sizeof_hdr, 348);
  EXPECT_EQ(std::memcmp(raw.data() + 344, "n+1\0", 4), 0);
  float vox_offset;
  std::memcpy(&vox_offset, raw.data() + 108, 4);
  EXPECT_EQ(vox_offset, 352.0f);
}

TEST(NiftiWrite, MaskRoundTripAsUint8) {
  TempDir tmp;
  std::mt19937_64 rng(9);
  auto m = flairnorm::testing::random_mask({7, 5, 3}, 0.3, rng);
  nifti::write_mask(m, {0.5, 0.5, 2.0}, tmp / "m.nii.gz");
  EXPECT_EQ(nifti::read_header(tmp / "m.nii.gz").datatype, nifti::DT_UINT8);
  auto back = nifti::read_mask(tmp / "m.nii.gz", MaskKind::WML);
  EXPECT_EQ(back, m);
}

TEST(NiftiWrite, LossyIntegerTargets) {
  TempDir tmp;
  Volume frac({2, 1, 1}, {}, {0.5, 1.0});
  EXPECT_EQ(code_of([&] { nifti::write_volume(frac, tmp / "x.nii", SampleType::Int16); }),
            ErrorCode::LossyDatatype);
  Volume big({1, 1, 1}, {}, {70000.0});
  EXPECT_EQ(code_of([&] { nifti::write_volume(big, tmp / "y.nii", SampleType::Int16); }),
            ErrorCode::LossyDatatype);
  Volume ok({2, 1, 1}, {}, {-3.0, 12.0});
  nifti::write_volume(ok, tmp / "z.nii", SampleType::Int16);
  auto back = nifti::read_volume(tmp / "z.nii");
  EXPECT_EQ(back.voxels()[0], -3.0);
  EXPECT_EQ(back.source_type(), SampleType::Int16);
}

TEST(NiftiWrite, AllSampleTypesRoundTrip) {
  TempDir tmp;
  Volume v({3, 1, 1}, {}, {0.0, 1.0, 200.0});
  for (auto t : {SampleType::UInt8, SampleType::Int16, SampleType::Int32,
                 SampleType::Float32, SampleType::Float64}) {
    auto path = tmp / ("t" + std::to_string(static_cast<int>(t)) + ".nii");
    nifti::write_volume(v, path, t);
    auto back = nifti::read_volume(path);
    EXPECT_EQ(std::vector<double>(back.voxels().begin(), back.voxels().end()),
              std::vector<double>(v.voxels().begin(), v.voxels().end()));
    EXPECT_EQ(back.source_type(), t);
  }
}
