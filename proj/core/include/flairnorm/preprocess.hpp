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

#include "flairnorm/volume.hpp"

namespace flairnorm {

inline constexpr double kDefaultBiasSigmaMm = 60.0;

/// In-plane 3x3 median on every axial slice, edge-replicated borders.
/// Requires nx, ny >= 3.
Volume median_filter_3x3(const Volume &volume);

/// Lowpass multiplicative bias-field correction.
///
/// The field is a Gaussian lowpass (standard deviation `sigma_mm`, converted
/// to voxels per axis from the spacing) of the in-mask log intensities,
/// computed as a normalized convolution so background never leaks in. Each
/// in-mask voxel becomes exp(log I - f + mean_mask(f)), which leaves the
/// in-mask geometric mean unchanged. Voxels outside the mask are copied.
Volume bias_correct(const Volume &volume, const Mask &mask,
                    double sigma_mm = kDefaultBiasSigmaMm);

/// Zero-padded separable Gaussian blur of a dense grid (sigma in mm).
/// Exposed for the bias stage and its tests.
std::vector<double> gaussian_blur(std::span<const double> data, const Dims &dims,
                                  const Spacing &spacing, double sigma_mm);

}  // namespace flairnorm
