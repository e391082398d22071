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
#include <span>
#include <vector>

#include "flairnorm/volume.hpp"

namespace flairnorm {

/// Read-only row-major view of one 2D slice (column index fastest).
struct SliceView {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::span<const double> data;

  double at(std::size_t r, std::size_t c) const noexcept {
    return data[r * cols + c];
  }
};

/// Axial slice z of a volume: rows run along y, columns along x.
SliceView axial_slice(const Volume &volume, std::size_t z);

struct PatchOrigin {
  std::size_t row = 0;
  std::size_t col = 0;
  friend bool operator==(const PatchOrigin &, const PatchOrigin &) = default;
};

struct PatchGrid {
  std::size_t patch_rows = 0;
  std::size_t patch_cols = 0;
  std::size_t stride_rows = 0;
  std::size_t stride_cols = 0;
  std::vector<PatchOrigin> origins;  // row-major order
};

/// Square patches of side `patch_size` tiling the slice with the requested
/// fractional overlap. Origins step by round(patch_size * (1 - overlap)); the
/// final origin on each axis is pulled back so the last patch ends on the
/// boundary. Slices smaller than a patch get a single origin and are padded
/// by edge replication in `extract_patch`.
PatchGrid extract_patches(const SliceView &slice, std::size_t patch_size,
                          double overlap);

/// Per-axis origins used by extract_patches.
std::vector<std::size_t> patch_axis_origins(std::size_t extent,
                                            std::size_t patch_size,
                                            std::size_t stride);

/// Copies one patch (row-major), replicating edge pixels past the boundary.
std::vector<double> extract_patch(const SliceView &slice, PatchOrigin origin,
                                  std::size_t patch_size);

}  // namespace flairnorm
