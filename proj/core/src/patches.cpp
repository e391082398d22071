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
#include "flairnorm/patches.hpp"

#include <algorithm>
#include <cmath>

#include "flairnorm/error.hpp"

namespace flairnorm {

SliceView axial_slice(const Volume &volume, std::size_t z) {
  const Dims &d = volume.dims();
  if (z >= d.nz) {
    throw Error(ErrorCode::InvalidArgument, "slice index out of range");
  }
  const std::size_t plane = d.nx * d.ny;
  return SliceView{d.ny, d.nx, volume.voxels().subspan(z * plane, plane)};
}

std::vector<std::size_t> patch_axis_origins(std::size_t extent,
                                            std::size_t patch_size,
                                            std::size_t stride) {
  std::vector<std::size_t> origins{0};
  if (extent <= patch_size) return origins;
  const std::size_t last = extent - patch_size;
  while (origins.back() < last) {
    origins.push_back(std::min(origins.back() + stride, last));
  }
  return origins;
}

PatchGrid extract_patches(const SliceView &slice, std::size_t patch_size,
                          double overlap) {
  if (!(overlap >= 0.0) || !(overlap < 1.0)) {
    throw Error(ErrorCode::InvalidOverlap, "overlap must lie in [0, 1)");
  }
  if (patch_size == 0 || slice.rows == 0 || slice.cols == 0) {
    throw Error(ErrorCode::InvalidArgument,
                "patch size and slice extents must be positive");
  }
  const auto stride = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::lround(static_cast<double>(patch_size) * (1.0 - overlap))));

  PatchGrid grid;
  grid.patch_rows = grid.patch_cols = patch_size;
  grid.stride_rows = grid.stride_cols = stride;
  const auto rows = patch_axis_origins(slice.rows, patch_size, stride);
  const auto cols = patch_axis_origins(slice.cols, patch_size, stride);
  grid.origins.reserve(rows.size() * cols.size());
  for (std::size_t r : rows) {
    for (std::size_t c : cols) grid.origins.push_back({r, c});
  }
  return grid;
}

std::vector<double> extract_patch(const SliceView &slice, PatchOrigin origin,
                                  std::size_t patch_size) {
  std::vector<double> out(patch_size * patch_size);
  for (std::size_t r = 0; r < patch_size; ++r) {
    const std::size_t sr = std::min(origin.row + r, slice.rows - 1);
    for (std::size_t c = 0; c < patch_size; ++c) {
      const std::size_t sc = std::min(origin.col + c, slice.cols - 1);
      out[r * patch_size + c] = slice.at(sr, sc);
    }
  }
  return out;
}

}  // namespace flairnorm
