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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <variant>

#include "flairnorm/volume.hpp"

namespace flairnorm::nifti {

inline constexpr std::int32_t kHeaderSize = 348;
inline constexpr std::size_t kSingleFileOffset = 352;

enum DatatypeCode : std::int16_t {
  DT_UINT8 = 2,
  DT_INT16 = 4,
  DT_INT32 = 8,
  DT_FLOAT32 = 16,
  DT_FLOAT64 = 64,
};

/// The subset of the 348-byte NIfTI-1 header this library reads and writes.
struct Header {
  std::int32_t sizeof_hdr = kHeaderSize;
  std::array<std::int16_t, 8> dim{};
  std::int16_t datatype = DT_FLOAT32;
  std::int16_t bitpix = 32;
  std::array<float, 8> pixdim{};
  float vox_offset = static_cast<float>(kSingleFileOffset);
  float scl_slope = 1.0f;
  float scl_inter = 0.0f;
  std::uint8_t xyzt_units = 0;
  std::array<char, 4> magic{'n', '+', '1', '\0'};
  bool big_endian = false;  // as found on disk; writes are little-endian
};

/// Decodes a raw 348-byte block. Detects byte order from sizeof_hdr.
Header parse_header(std::span<const std::uint8_t> bytes);

/// Encodes a header into 348 little-endian bytes.
std::array<std::uint8_t, kHeaderSize> encode_header(const Header &header);

Dims header_dims(const Header &header);

/// Voxel size from pixdim[1..3]; a zero entry (common for 2D files) reads as 1.
Spacing header_spacing(const Header &header);

SampleType sample_type(std::int16_t datatype);
std::int16_t datatype_code(SampleType type);

/// Reads a .nii, .nii.gz or .hdr/.img pair. Compression is detected from the
/// stream itself, not the suffix.
Volume read_volume(const std::filesystem::path &path);

/// Reads a file as a binary mask; any decoded value other than 0 or 1 raises
/// NonBinaryMask.
Mask read_mask(const std::filesystem::path &path, MaskKind kind);

Header read_header(const std::filesystem::path &path);

/// Writes a single-file NIfTI-1 ("n+1", vox_offset 352, slope 1, inter 0).
/// Gzip is used when the path ends in ".gz". Integer targets refuse values
/// they cannot hold exactly (LossyDatatype); float32 stores the nearest
/// representable value.
void write_volume(const Volume &volume, const std::filesystem::path &path,
                  SampleType type = SampleType::Float32);

/// Masks are always written as uint8.
void write_mask(const Mask &mask, const Spacing &spacing,
                const std::filesystem::path &path);

/// True if every voxel can be stored as `type` without changing its value.
bool representable(const Volume &volume, SampleType type);

}  // namespace flairnorm::nifti
