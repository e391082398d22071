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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace flairnorm {

struct Dims {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::size_t nz = 0;

  std::size_t count() const noexcept { return nx * ny * nz; }
  std::size_t index(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return x + nx * (y + ny * z);
  }
  friend bool operator==(const Dims &, const Dims &) = default;
};

/// Voxel size in millimetres along x, y and z.
struct Spacing {
  double sx = 1.0;
  double sy = 1.0;
  double sz = 1.0;

  double voxel_volume_mm3() const noexcept { return sx * sy * sz; }
  friend bool operator==(const Spacing &, const Spacing &) = default;
};

/// On-disk sample type the voxels were decoded from. Carried along so that a
/// pass-through write can reproduce the source encoding.
enum class SampleType { UInt8, Int16, Int32, Float32, Float64 };

/// Dense scalar 3D grid, x-fastest. Values are finite; spacing is positive.
/// Immutable once constructed; transforms return new volumes.
class Volume {
 public:
  Volume(Dims dims, Spacing spacing, std::vector<double> voxels,
         std::string intensity_unit = "arbitrary",
         SampleType source_type = SampleType::Float32);

  const Dims &dims() const noexcept { return dims_; }
  const Spacing &spacing() const noexcept { return spacing_; }
  std::span<const double> voxels() const noexcept { return voxels_; }
  double at(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return voxels_[dims_.index(x, y, z)];
  }
  const std::string &intensity_unit() const noexcept { return unit_; }
  SampleType source_type() const noexcept { return source_type_; }

  /// Same geometry, new payload and unit tag.
  Volume with_voxels(std::vector<double> voxels, std::string unit) const;

 private:
  Dims dims_;
  Spacing spacing_;
  std::vector<double> voxels_;
  std::string unit_;
  SampleType source_type_;
};

enum class MaskKind { ICV, WML };

/// Binary 3D mask (values exactly 0 or 1), x-fastest.
class Mask {
 public:
  Mask(Dims dims, std::vector<std::uint8_t> bits, MaskKind kind);

  const Dims &dims() const noexcept { return dims_; }
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  bool at(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return bits_[dims_.index(x, y, z)] != 0;
  }
  MaskKind kind() const noexcept { return kind_; }
  std::size_t count() const noexcept;

  friend bool operator==(const Mask &a, const Mask &b) {
    return a.dims_ == b.dims_ && a.bits_ == b.bits_;
  }

 private:
  Dims dims_;
  std::vector<std::uint8_t> bits_;
  MaskKind kind_;
};

/// All-ones mask congruent with `dims`.
Mask full_mask(Dims dims, MaskKind kind = MaskKind::ICV);

/// Throws DimsMismatch when the two grids differ.
void require_same_dims(const Dims &a, const Dims &b, const char *what);

struct MaskedStats {
  double mean = 0.0;
  double std = 0.0;  // population
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

/// Foreground-only statistics. Requires at least two foreground voxels.
MaskedStats masked_stats(const Volume &volume, const Mask &mask);

/// In-mask voxel values in storage order.
std::vector<double> masked_values(const Volume &volume, const Mask &mask);

/// Lesion load in millilitres: foreground count times voxel volume.
double lesion_load_ml(const Mask &mask, const Spacing &spacing);

}  // namespace flairnorm
