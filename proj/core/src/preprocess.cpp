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
#include "flairnorm/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "flairnorm/error.hpp"

namespace flairnorm {

namespace {

std::vector<double> gaussian_kernel(double sigma_vox, std::size_t extent) {
  const auto radius = std::min<std::size_t>(
      static_cast<std::size_t>(std::ceil(3.0 * sigma_vox)),
      extent > 0 ? extent - 1 : 0);
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double d = static_cast<double>(i) - static_cast<double>(radius);
    k[i] = std::exp(-0.5 * d * d / (sigma_vox * sigma_vox));
    sum += k[i];
  }
  for (double &w : k) w /= sum;
  return k;
}

// Convolves along one axis with zero padding. `stride` is the distance between
// neighbours on that axis, `extent` their count.
void blur_axis(std::vector<double> &data, const Dims &dims, int axis,
               const std::vector<double> &kernel) {
  const std::size_t extent = axis == 0 ? dims.nx : axis == 1 ? dims.ny : dims.nz;
  const std::size_t stride = axis == 0 ? 1 : axis == 1 ? dims.nx : dims.nx * dims.ny;
  const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  std::vector<double> line(extent);
  std::vector<double> out(extent);

  const std::size_t lines = dims.count() / extent;
  for (std::size_t l = 0; l < lines; ++l) {
    // Start index of line l for the chosen axis.
    std::size_t start;
    if (axis == 0) {
      start = l * dims.nx;
    } else if (axis == 1) {
      start = (l / dims.nx) * dims.nx * dims.ny + l % dims.nx;
    } else {
      start = l;
    }
    for (std::size_t i = 0; i < extent; ++i) line[i] = data[start + i * stride];
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(extent); ++i) {
      const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - radius);
      const std::ptrdiff_t hi =
          std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(extent) - 1, i + radius);
      double acc = 0.0;
      for (std::ptrdiff_t j = lo; j <= hi; ++j) {
        acc += kernel[static_cast<std::size_t>(j - i + radius)] *
               line[static_cast<std::size_t>(j)];
      }
      out[static_cast<std::size_t>(i)] = acc;
    }
    for (std::size_t i = 0; i < extent; ++i) data[start + i * stride] = out[i];
  }
}

}  // namespace

Volume median_filter_3x3(const Volume &volume) {
  const Dims &d = volume.dims();
  if (d.nx < 3 || d.ny < 3) {
    throw Error(ErrorCode::TooSmall, "median filter needs nx, ny >= 3");
  }
  const auto in = volume.voxels();
  std::vector<double> out(in.size());
  std::array<double, 9> win;
  const auto clampi = [](std::ptrdiff_t v, std::size_t n) {
    return static_cast<std::size_t>(
        std::clamp<std::ptrdiff_t>(v, 0, static_cast<std::ptrdiff_t>(n) - 1));
  };
  for (std::size_t z = 0; z < d.nz; ++z) {
    for (std::size_t y = 0; y < d.ny; ++y) {
      for (std::size_t x = 0; x < d.nx; ++x) {
        std::size_t k = 0;
        for (int dy = -1; dy <= 1; ++dy) {
          const std::size_t yy = clampi(static_cast<std::ptrdiff_t>(y) + dy, d.ny);
          for (int dx = -1; dx <= 1; ++dx) {
            const std::size_t xx = clampi(static_cast<std::ptrdiff_t>(x) + dx, d.nx);
            win[k++] = in[d.index(xx, yy, z)];
          }
        }
        std::nth_element(win.begin(), win.begin() + 4, win.end());
        out[d.index(x, y, z)] = win[4];
      }
    }
  }
  return volume.with_voxels(std::move(out), volume.intensity_unit());
}

std::vector<double> gaussian_blur(std::span<const double> data, const Dims &dims,
                                  const Spacing &spacing, double sigma_mm) {
  if (!(sigma_mm > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "sigma_mm must be positive");
  }
  std::vector<double> out(data.begin(), data.end());
  const std::array<double, 3> sp{spacing.sx, spacing.sy, spacing.sz};
  const std::array<std::size_t, 3> ext{dims.nx, dims.ny, dims.nz};
  for (int axis = 0; axis < 3; ++axis) {
    if (ext[axis] < 2) continue;
    blur_axis(out, dims, axis, gaussian_kernel(sigma_mm / sp[axis], ext[axis]));
  }
  return out;
}

Volume bias_correct(const Volume &volume, const Mask &mask, double sigma_mm) {
  require_same_dims(volume.dims(), mask.dims(), "bias_correct");
  if (!(sigma_mm > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "sigma_mm must be positive");
  }
  const auto in = volume.voxels();
  const auto m = mask.bits();
  const std::size_t n = in.size();

  std::vector<double> logi(n, 0.0);
  std::vector<double> weight(n, 0.0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!m[i]) continue;
    if (!(in[i] > 0.0)) {
      throw Error(ErrorCode::NonPositiveIntensity,
                  "bias correction needs positive in-mask intensities");
    }
    logi[i] = std::log(in[i]);
    weight[i] = 1.0;
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::EmptyMask, "bias_correct: empty mask");

  const auto num = gaussian_blur(logi, volume.dims(), volume.spacing(), sigma_mm);
  const auto den = gaussian_blur(weight, volume.dims(), volume.spacing(), sigma_mm);

  std::vector<double> field(n, 0.0);
  double field_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!m[i]) continue;
    // den > 0: every in-mask voxel contributes its own centre tap.
    field[i] = num[i] / den[i];
    field_sum += field[i];
  }
  const double field_mean = field_sum / static_cast<double>(count);

  std::vector<double> out(in.begin(), in.end());
  for (std::size_t i = 0; i < n; ++i) {
    if (m[i]) out[i] = std::exp(logi[i] - field[i] + field_mean);
  }
  return volume.with_voxels(std::move(out), volume.intensity_unit());
}

}  // namespace flairnorm
