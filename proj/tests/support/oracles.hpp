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

// Brute-force reference implementations. They share no code with the library
// paths they check: plain loops over coordinates, full sorts, all-pairs
// distances and union-find labelling.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "flairnorm/volume.hpp"

namespace flairnorm::oracle {

struct Stats {
  double mean, std;
  std::size_t count;
};

inline Stats masked_stats(const Volume &v, const Mask &m) {
  long double sum = 0, sq = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < v.voxels().size(); ++i) {
    if (m.bits()[i] != 1) continue;
    sum += v.voxels()[i];
    ++n;
  }
  const long double mean = sum / n;
  for (std::size_t i = 0; i < v.voxels().size(); ++i) {
    if (m.bits()[i] != 1) continue;
    sq += (v.voxels()[i] - mean) * (v.voxels()[i] - mean);
  }
  return {static_cast<double>(mean), static_cast<double>(std::sqrt(sq / n)), n};
}

/// Linear scan over bins with half-open intervals, last bin closed.
inline std::vector<double> histogram_counts(const Volume &v, const Mask &m,
                                            const std::vector<double> &edges) {
  const std::size_t bins = edges.size() - 1;
  std::vector<double> counts(bins, 0.0);
  for (std::size_t i = 0; i < v.voxels().size(); ++i) {
    if (!m.bits()[i]) continue;
    const double x = v.voxels()[i];
    for (std::size_t b = 0; b < bins; ++b) {
      const bool last = b + 1 == bins;
      if (x >= edges[b] && (x < edges[b + 1] || (last && x == edges[b + 1]))) {
        counts[b] += 1.0;
        break;
      }
    }
  }
  return counts;
}

inline std::vector<double> median3x3(const Volume &v) {
  const Dims d = v.dims();
  std::vector<double> out(d.count());
  for (std::size_t z = 0; z < d.nz; ++z)
    for (std::size_t y = 0; y < d.ny; ++y)
      for (std::size_t x = 0; x < d.nx; ++x) {
        std::vector<double> w;
        for (long dy = -1; dy <= 1; ++dy)
          for (long dx = -1; dx <= 1; ++dx) {
            const long xx = std::clamp<long>(static_cast<long>(x) + dx, 0, d.nx - 1);
            const long yy = std::clamp<long>(static_cast<long>(y) + dy, 0, d.ny - 1);
            w.push_back(v.at(xx, yy, z));
          }
        std::sort(w.begin(), w.end());
        out[d.index(x, y, z)] = w[4];
      }
  return out;
}

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0;
};

inline Counts classify(const Mask &p, const Mask &g) {
  Counts c;
  for (std::size_t i = 0; i < p.bits().size(); ++i) {
    const bool a = p.bits()[i], b = g.bits()[i];
    if (a && b) ++c.tp;
    if (a && !b) ++c.fp;
    if (!a && b) ++c.fn;
  }
  return c;
}

inline double dsc(const Mask &p, const Mask &g) {
  const Counts c = classify(p, g);
  const std::size_t denom = 2 * c.tp + c.fp + c.fn;
  return denom == 0 ? 1.0 : 2.0 * c.tp / denom;
}

inline double extra_fraction(const Mask &p, const Mask &g) {
  const Counts c = classify(p, g);
  return static_cast<double>(c.fp) / static_cast<double>(c.tp + c.fn);
}

inline double avd(const Mask &p, const Mask &g, const Spacing &s) {
  const Counts c = classify(p, g);
  const double vox = s.sx * s.sy * s.sz / 1000.0;
  const double vp = (c.tp + c.fp) * vox, vg = (c.tp + c.fn) * vox;
  return 100.0 * std::abs(vp - vg) / vg;
}

struct Coord {
  long x, y, z;
};

inline std::vector<Coord> boundary(const Mask &m) {
  const Dims d = m.dims();
  auto on = [&](long x, long y, long z) {
    if (x < 0 || y < 0 || z < 0 || x >= static_cast<long>(d.nx) ||
        y >= static_cast<long>(d.ny) || z >= static_cast<long>(d.nz))
      return false;
    return m.at(x, y, z);
  };
  std::vector<Coord> out;
  for (long z = 0; z < static_cast<long>(d.nz); ++z)
    for (long y = 0; y < static_cast<long>(d.ny); ++y)
      for (long x = 0; x < static_cast<long>(d.nx); ++x) {
        if (!on(x, y, z)) continue;
        // Off-grid neighbours count as background.
        if (!on(x - 1, y, z) || !on(x + 1, y, z) || !on(x, y - 1, z) ||
            !on(x, y + 1, z) || !on(x, y, z - 1) || !on(x, y, z + 1))
          out.push_back({x, y, z});
      }
  return out;
}

inline double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * (v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - lo) * (v[hi] - v[lo]);
}

inline std::vector<double> directed(const std::vector<Coord> &a,
                                    const std::vector<Coord> &b, const Spacing &s) {
  std::vector<double> out;
  for (const Coord &p : a) {
    double best = INFINITY;
    for (const Coord &q : b) {
      const double dx = (p.x - q.x) * s.sx, dy = (p.y - q.y) * s.sy,
                   dz = (p.z - q.z) * s.sz;
      best = std::min(best, std::sqrt(dx * dx + dy * dy + dz * dz));
    }
    out.push_back(best);
  }
  return out;
}

inline double h95(const Mask &p, const Mask &g, const Spacing &s) {
  const auto bp = boundary(p), bg = boundary(g);
  return std::max(percentile(directed(bp, bg, s), 0.95),
                  percentile(directed(bg, bp, s), 0.95));
}

/// Union-find 26-connected labelling; returns a root id per voxel (-1 = bg).
inline std::vector<long> components(const Mask &m) {
  const Dims d = m.dims();
  const long n = static_cast<long>(d.count());
  std::vector<long> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](long a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (long z = 0; z < static_cast<long>(d.nz); ++z)
    for (long y = 0; y < static_cast<long>(d.ny); ++y)
      for (long x = 0; x < static_cast<long>(d.nx); ++x) {
        if (!m.at(x, y, z)) continue;
        for (long dz = -1; dz <= 1; ++dz)
          for (long dy = -1; dy <= 1; ++dy)
            for (long dx = -1; dx <= 1; ++dx) {
              const long xx = x + dx, yy = y + dy, zz = z + dz;
              if (xx < 0 || yy < 0 || zz < 0 || xx >= static_cast<long>(d.nx) ||
                  yy >= static_cast<long>(d.ny) || zz >= static_cast<long>(d.nz))
                continue;
              if (!m.at(xx, yy, zz)) continue;
              parent[find(static_cast<long>(d.index(x, y, z)))] =
                  find(static_cast<long>(d.index(xx, yy, zz)));
            }
      }
  std::vector<long> out(n, -1);
  for (long i = 0; i < n; ++i)
    if (m.bits()[i]) out[i] = find(i);
  return out;
}

struct Detection {
  double f1, recall;
  std::size_t n_gt, n_pred;
};

inline Detection lesion_detection(const Mask &p, const Mask &g) {
  const auto lp = components(p), lg = components(g);
  std::vector<long> gt_roots, pred_roots, gt_hit, pred_hit;
  for (std::size_t i = 0; i < lp.size(); ++i) {
    if (lg[i] >= 0) gt_roots.push_back(lg[i]);
    if (lp[i] >= 0) pred_roots.push_back(lp[i]);
    if (lg[i] >= 0 && lp[i] >= 0) {
      gt_hit.push_back(lg[i]);
      pred_hit.push_back(lp[i]);
    }
  }
  auto uniq = [](std::vector<long> v) {
    std::sort(v.begin(), v.end());
    return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
  };
  const std::size_t ng = uniq(gt_roots), np = uniq(pred_roots);
  if (ng == 0 && np == 0) return {1.0, 1.0, 0, 0};
  const double recall = ng ? static_cast<double>(uniq(gt_hit)) / ng : 0.0;
  const double precision = np ? static_cast<double>(uniq(pred_hit)) / np : 0.0;
  const double f1 = recall + precision > 0 ? 2 * recall * precision / (recall + precision) : 0.0;
  return {f1, recall, ng, np};
}

inline std::vector<std::uint8_t> majority(const std::vector<Mask> &masks) {
  std::vector<std::uint8_t> out(masks.front().bits().size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    int votes = 0;
    for (const Mask &m : masks) votes += m.bits()[i];
    out[i] = votes * 2 > static_cast<int>(masks.size());
  }
  return out;
}

inline double kl(const std::vector<double> &p, const std::vector<double> &q, double eps) {
  double sp = 0, sq = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    sp += p[i] + eps;
    sq += q[i] + eps;
  }
  double d = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double a = (p[i] + eps) / sp, b = (q[i] + eps) / sq;
    d += a * std::log(a / b);
  }
  return d;
}

}  // namespace flairnorm::oracle
