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
#include "flairnorm/volume.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "flairnorm/error.hpp"

namespace flairnorm {

namespace {

std::string dims_str(const Dims &d) {
  std::ostringstream os;
  os << d.nx << "x" << d.ny << "x" << d.nz;
  return os.str();
}

void validate_dims(const Dims &d) {
  if (d.nx == 0 || d.ny == 0 || d.nz == 0) {
    throw Error(ErrorCode::InvalidArgument,
                "volume extents must be positive, got " + dims_str(d));
  }
}

}  // namespace

Volume::Volume(Dims dims, Spacing spacing, std::vector<double> voxels,
               std::string intensity_unit, SampleType source_type)
    : dims_(dims),
      spacing_(spacing),
      voxels_(std::move(voxels)),
      unit_(std::move(intensity_unit)),
      source_type_(source_type) {
  validate_dims(dims_);
  if (voxels_.size() != dims_.count()) {
    throw Error(ErrorCode::DimsMismatch,
                "voxel count " + std::to_string(voxels_.size()) +
                    " does not match dims " + dims_str(dims_));
  }
  if (!(spacing_.sx > 0) || !(spacing_.sy > 0) || !(spacing_.sz > 0)) {
    throw Error(ErrorCode::InvalidArgument, "spacing must be positive");
  }
  if (!std::all_of(voxels_.begin(), voxels_.end(),
                   [](double v) { return std::isfinite(v); })) {
    throw Error(ErrorCode::NonFiniteVoxel, "volume contains NaN or Inf");
  }
}

Volume Volume::with_voxels(std::vector<double> voxels, std::string unit) const {
  return Volume(dims_, spacing_, std::move(voxels), std::move(unit),
                source_type_);
}

Mask::Mask(Dims dims, std::vector<std::uint8_t> bits, MaskKind kind)
    : dims_(dims), bits_(std::move(bits)), kind_(kind) {
  validate_dims(dims_);
  if (bits_.size() != dims_.count()) {
    throw Error(ErrorCode::DimsMismatch,
                "mask size " + std::to_string(bits_.size()) +
                    " does not match dims " + dims_str(dims_));
  }
  if (!std::all_of(bits_.begin(), bits_.end(),
                   [](std::uint8_t b) { return b <= 1; })) {
    throw Error(ErrorCode::NonBinaryMask, "mask values must be 0 or 1");
  }
}

std::size_t Mask::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

Mask full_mask(Dims dims, MaskKind kind) {
  return Mask(dims, std::vector<std::uint8_t>(dims.count(), 1), kind);
}

void require_same_dims(const Dims &a, const Dims &b, const char *what) {
  if (a != b) {
    throw Error(ErrorCode::DimsMismatch, std::string(what) + ": " +
                                             dims_str(a) + " vs " +
                                             dims_str(b));
  }
}

std::vector<double> masked_values(const Volume &volume, const Mask &mask) {
  require_same_dims(volume.dims(), mask.dims(), "masked_values");
  const auto v = volume.voxels();
  const auto m = mask.bits();
  std::vector<double> out;
  out.reserve(mask.count());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (m[i]) out.push_back(v[i]);
  }
  return out;
}

MaskedStats masked_stats(const Volume &volume, const Mask &mask) {
  require_same_dims(volume.dims(), mask.dims(), "masked_stats");
  const auto v = volume.voxels();
  const auto m = mask.bits();

  MaskedStats s;
  double sum = 0.0;
  s.min = std::numeric_limits<double>::infinity();
  s.max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!m[i]) continue;
    ++s.count;
    sum += v[i];
    s.min = std::min(s.min, v[i]);
    s.max = std::max(s.max, v[i]);
  }
  if (s.count < 2) {
    throw Error(ErrorCode::EmptyMask,
                "need at least 2 foreground voxels, got " +
                    std::to_string(s.count));
  }
  s.mean = sum / static_cast<double>(s.count);

  // Second pass keeps the variance accurate for large offsets.
  double ss = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!m[i]) continue;
    const double d = v[i] - s.mean;
    ss += d * d;
  }
  s.std = std::sqrt(ss / static_cast<double>(s.count));
  return s;
}

double lesion_load_ml(const Mask &mask, const Spacing &spacing) {
  return static_cast<double>(mask.count()) * spacing.voxel_volume_mm3() /
         1000.0;
}

}  // namespace flairnorm
