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
#include "flairnorm/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "flairnorm/error.hpp"

namespace flairnorm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct OverlapCounts {
  std::size_t pred = 0;
  std::size_t gt = 0;
  std::size_t both = 0;
};

OverlapCounts overlap(const Mask &pred, const Mask &gt) {
  require_same_dims(pred.dims(), gt.dims(), "prediction vs ground truth");
  OverlapCounts c;
  const auto p = pred.bits();
  const auto g = gt.bits();
  for (std::size_t i = 0; i < p.size(); ++i) {
    c.pred += p[i];
    c.gt += g[i];
    c.both += p[i] & g[i];
  }
  return c;
}

double percentile_linear(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto k = static_cast<std::size_t>(std::floor(pos));
  if (k + 1 >= values.size()) return values.back();
  return values[k] + (pos - static_cast<double>(k)) * (values[k + 1] - values[k]);
}

// One pass of the Felzenszwalb-Huttenlocher lower envelope along a line of
// `n` samples at `stride`, sample spacing `step` mm. Infinite entries are not
// sites.
void edt_line(double *data, std::size_t n, std::size_t stride, double step,
              std::vector<double> &f, std::vector<std::size_t> &v,
              std::vector<double> &z) {
  f.resize(n);
  v.resize(n);
  z.resize(n + 1);
  for (std::size_t i = 0; i < n; ++i) f[i] = data[i * stride];

  std::ptrdiff_t k = -1;
  for (std::size_t q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    const double xq = static_cast<double>(q) * step;
    double s;
    for (;;) {
      const std::size_t p = v[static_cast<std::size_t>(k)];
      const double xp = static_cast<double>(p) * step;
      s = ((f[q] + xq * xq) - (f[p] + xp * xp)) / (2.0 * (xq - xp));
      if (s <= z[static_cast<std::size_t>(k)]) {
        --k;  // z[0] is -inf, so k stays >= 0
      } else {
        break;
      }
    }
    ++k;
    v[static_cast<std::size_t>(k)] = q;
    z[static_cast<std::size_t>(k)] = s;
    z[static_cast<std::size_t>(k) + 1] = kInf;
  }
  if (k < 0) return;  // no sites on this line

  std::size_t j = 0;
  for (std::size_t q = 0; q < n; ++q) {
    const double xq = static_cast<double>(q) * step;
    while (z[j + 1] < xq) ++j;
    const double d = (static_cast<double>(q) - static_cast<double>(v[j])) * step;
    data[q * stride] = d * d + f[v[j]];
  }
}

/// Squared Euclidean distance (mm^2) from every voxel to the nearest site.
std::vector<double> squared_distance_to(std::span<const std::size_t> sites,
                                        const Dims &d, const Spacing &sp) {
  std::vector<double> dist(d.count(), kInf);
  for (std::size_t i : sites) dist[i] = 0.0;

  std::vector<double> f, z;
  std::vector<std::size_t> v;
  for (std::size_t zz = 0; zz < d.nz; ++zz)
    for (std::size_t y = 0; y < d.ny; ++y)
      edt_line(&dist[d.index(0, y, zz)], d.nx, 1, sp.sx, f, v, z);
  for (std::size_t zz = 0; zz < d.nz; ++zz)
    for (std::size_t x = 0; x < d.nx; ++x)
      edt_line(&dist[d.index(x, 0, zz)], d.ny, d.nx, sp.sy, f, v, z);
  for (std::size_t y = 0; y < d.ny; ++y)
    for (std::size_t x = 0; x < d.nx; ++x)
      edt_line(&dist[d.index(x, y, 0)], d.nz, d.nx * d.ny, sp.sz, f, v, z);
  return dist;
}

}  // namespace

// ---------------------------------------------------------------------------

double dsc(const Mask &pred, const Mask &gt) {
  const OverlapCounts c = overlap(pred, gt);
  if (c.pred + c.gt == 0) return 1.0;
  return 2.0 * static_cast<double>(c.both) / static_cast<double>(c.pred + c.gt);
}

double extra_fraction(const Mask &pred, const Mask &gt) {
  const OverlapCounts c = overlap(pred, gt);
  if (c.gt == 0) {
    throw Error(ErrorCode::EmptyGroundTruth, "extra fraction needs |G| > 0");
  }
  return static_cast<double>(c.pred - c.both) / static_cast<double>(c.gt);
}

double avd(const Mask &pred, const Mask &gt, const Spacing &spacing) {
  require_same_dims(pred.dims(), gt.dims(), "prediction vs ground truth");
  const double vg = lesion_load_ml(gt, spacing);
  if (!(vg > 0.0)) {
    throw Error(ErrorCode::EmptyGroundTruth, "volume difference needs |G| > 0");
  }
  const double vp = lesion_load_ml(pred, spacing);
  return 100.0 * std::abs(vp - vg) / vg;
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> boundary_voxels(const Mask &mask) {
  const Dims &d = mask.dims();
  const auto b = mask.bits();
  std::vector<std::size_t> out;
  for (std::size_t z = 0; z < d.nz; ++z) {
    for (std::size_t y = 0; y < d.ny; ++y) {
      for (std::size_t x = 0; x < d.nx; ++x) {
        const std::size_t i = d.index(x, y, z);
        if (!b[i]) continue;
        const bool edge = x == 0 || y == 0 || z == 0 || x + 1 == d.nx ||
                          y + 1 == d.ny || z + 1 == d.nz;
        if (edge || !b[i - 1] || !b[i + 1] || !b[i - d.nx] || !b[i + d.nx] ||
            !b[i - d.nx * d.ny] || !b[i + d.nx * d.ny]) {
          out.push_back(i);
        }
      }
    }
  }
  return out;
}

std::vector<double> directed_surface_distances(const Mask &from, const Mask &to,
                                               const Spacing &spacing) {
  require_same_dims(from.dims(), to.dims(), "surface distance");
  const auto src = boundary_voxels(from);
  const auto dst = boundary_voxels(to);
  if (src.empty() || dst.empty()) {
    throw Error(ErrorCode::EmptyMask, "surface distance needs non-empty masks");
  }
  const auto sq = squared_distance_to(dst, from.dims(), spacing);
  std::vector<double> out(src.size());
  std::transform(src.begin(), src.end(), out.begin(),
                 [&](std::size_t i) { return std::sqrt(sq[i]); });
  return out;
}

double h95(const Mask &pred, const Mask &gt, const Spacing &spacing) {
  const double a = percentile_linear(directed_surface_distances(pred, gt, spacing), 0.95);
  const double b = percentile_linear(directed_surface_distances(gt, pred, spacing), 0.95);
  return std::max(a, b);
}

// ---------------------------------------------------------------------------

Components label_components(const Mask &mask) {
  const Dims &d = mask.dims();
  const auto bits = mask.bits();
  Components c;
  c.labels.assign(bits.size(), 0);

  std::vector<std::size_t> stack;
  for (std::size_t seed = 0; seed < bits.size(); ++seed) {
    if (!bits[seed] || c.labels[seed] != 0) continue;
    const auto label = static_cast<std::int32_t>(++c.count);
    c.labels[seed] = label;
    stack.push_back(seed);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const std::size_t x = i % d.nx;
      const std::size_t y = (i / d.nx) % d.ny;
      const std::size_t z = i / (d.nx * d.ny);
      for (int dz = -1; dz <= 1; ++dz) {
        if ((dz < 0 && z == 0) || (dz > 0 && z + 1 == d.nz)) continue;
        for (int dy = -1; dy <= 1; ++dy) {
          if ((dy < 0 && y == 0) || (dy > 0 && y + 1 == d.ny)) continue;
          for (int dx = -1; dx <= 1; ++dx) {
            if ((dx < 0 && x == 0) || (dx > 0 && x + 1 == d.nx)) continue;
            const std::size_t j = d.index(x + dx, y + dy, z + dz);
            if (bits[j] && c.labels[j] == 0) {
              c.labels[j] = label;
              stack.push_back(j);
            }
          }
        }
      }
    }
  }
  return c;
}

namespace {

/// Number of components of `comps` that are hit by `other`.
std::size_t components_hit(const Components &comps, const Mask &other,
                           double min_fraction) {
  std::vector<std::size_t> size(comps.count + 1, 0), shared(comps.count + 1, 0);
  const auto o = other.bits();
  for (std::size_t i = 0; i < comps.labels.size(); ++i) {
    const auto l = static_cast<std::size_t>(comps.labels[i]);
    if (l == 0) continue;
    ++size[l];
    shared[l] += o[i];
  }
  std::size_t hit = 0;
  for (std::size_t l = 1; l <= comps.count; ++l) {
    if (shared[l] == 0) continue;
    if (static_cast<double>(shared[l]) / static_cast<double>(size[l]) >= min_fraction) ++hit;
  }
  return hit;
}

}  // namespace

LesionDetection lesion_detection(const Mask &pred, const Mask &gt,
                                 const DetectionOptions &options) {
  require_same_dims(pred.dims(), gt.dims(), "prediction vs ground truth");
  const Components pc = label_components(pred);
  const Components gc = label_components(gt);

  LesionDetection r;
  r.n_gt_lesions = gc.count;
  r.n_pred_lesions = pc.count;
  if (gc.count == 0 && pc.count == 0) {
    r.f1 = r.recall = r.precision = 1.0;
    return r;
  }
  const std::size_t detected = components_hit(gc, pred, options.min_overlap_fraction);
  const std::size_t true_pos = components_hit(pc, gt, options.min_overlap_fraction);
  r.recall = gc.count ? static_cast<double>(detected) / static_cast<double>(gc.count) : 0.0;
  r.precision = pc.count ? static_cast<double>(true_pos) / static_cast<double>(pc.count) : 0.0;
  r.f1 = r.recall + r.precision > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

// ---------------------------------------------------------------------------

double kl_divergence(const Histogram &p, const Histogram &q, double epsilon) {
  if (!(epsilon > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  }
  if (!std::equal(p.edges().begin(), p.edges().end(), q.edges().begin(),
                  q.edges().end())) {
    throw Error(ErrorCode::EdgesMismatch, "KL needs histograms on one grid");
  }
  if (!p.normalized() || !q.normalized()) {
    throw Error(ErrorCode::NotNormalized, "KL needs normalized histograms");
  }
  const auto pc = p.counts();
  const auto qc = q.counts();
  const double eps_total = epsilon * static_cast<double>(pc.size());
  const double pz = p.total() + eps_total;
  const double qz = q.total() + eps_total;
  double d = 0.0;
  for (std::size_t i = 0; i < pc.size(); ++i) {
    const double pi = (pc[i] + epsilon) / pz;
    const double qi = (qc[i] + epsilon) / qz;
    d += pi * std::log(pi / qi);
  }
  return std::max(0.0, d);
}

AlignmentReport dataset_alignment_report(std::span<const AlignmentInput> inputs,
                                         std::string method, std::size_t bins,
                                         double epsilon) {
  if (inputs.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "alignment needs at least 2 volumes");
  }
  std::vector<const AlignmentInput *> order;
  for (const auto &in : inputs) order.push_back(&in);
  std::sort(order.begin(), order.end(), [](const auto *a, const auto *b) {
    return a->volume_id < b->volume_id;
  });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (order[i]->volume_id == order[i - 1]->volume_id) {
      throw Error(ErrorCode::InvalidArgument,
                  "duplicate volume id " + order[i]->volume_id);
    }
  }

  double lo = kInf, hi = -kInf;
  for (const auto *in : order) {
    const MaskedStats s = masked_stats(in->volume, in->mask);
    lo = std::min(lo, s.min);
    hi = std::max(hi, s.max);
  }

  AlignmentReport report;
  report.method = method;
  for (const auto *in : order) {
    report.histograms.push_back(
        compute_histogram(in->volume, in->mask, bins, Range{lo, hi}).to_normalized());
  }
  report.mean_histogram = mean_histogram(report.histograms);

  double total = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const double kl = kl_divergence(report.histograms[i], *report.mean_histogram, epsilon);
    report.records.push_back({order[i]->volume_id, kl, method});
    total += kl;
  }
  report.mean_kl = total / static_cast<double>(order.size());
  return report;
}

// ---------------------------------------------------------------------------

LesionLoadBin lesion_load_bin(double ml) noexcept {
  if (ml < 10.0) return LesionLoadBin::LT10;
  if (ml < 25.0) return LesionLoadBin::TEN_TO_25;
  return LesionLoadBin::GE25;
}

std::string_view to_string(LesionLoadBin bin) noexcept {
  switch (bin) {
    case LesionLoadBin::LT10: return "LT10";
    case LesionLoadBin::TEN_TO_25: return "TEN_TO_25";
    case LesionLoadBin::GE25: return "GE25";
  }
  return "LT10";
}

LesionLoadBin parse_lesion_load_bin(std::string_view s) {
  for (auto b : {LesionLoadBin::LT10, LesionLoadBin::TEN_TO_25, LesionLoadBin::GE25}) {
    if (s == to_string(b)) return b;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown lesion load bin '" + std::string(s) + "'");
}

EvalRecord evaluate_pair(std::string volume_id, std::string method,
                         const Mask &pred, const Mask &gt, const Spacing &spacing,
                         const DetectionOptions &options) {
  require_same_dims(pred.dims(), gt.dims(), "prediction vs ground truth");
  EvalRecord r;
  r.volume_id = std::move(volume_id);
  r.method = std::move(method);
  r.dsc = dsc(pred, gt);
  const bool gt_empty = gt.count() == 0;
  r.ef = gt_empty ? kNaN : extra_fraction(pred, gt);
  r.avd_percent = gt_empty ? kNaN : avd(pred, gt, spacing);
  r.h95_mm = (gt_empty || pred.count() == 0) ? kNaN : h95(pred, gt, spacing);
  const LesionDetection det = lesion_detection(pred, gt, options);
  r.f1_lesion = det.f1;
  r.recall_lesion = det.recall;
  r.lesion_load_ml = lesion_load_ml(gt, spacing);
  r.ll_bin = lesion_load_bin(r.lesion_load_ml);
  return r;
}

std::string format_g6(double v) {
  std::array<char, 64> buf;
  std::snprintf(buf.data(), buf.size(), "%.6g", v);
  return buf.data();
}

namespace {

constexpr std::string_view kEmptyGt = "EmptyGroundTruth";
constexpr std::string_view kEmptyMask = "EmptyMask";

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string metric_field(double v, std::string_view sentinel) {
  return std::isnan(v) ? std::string(sentinel) : format_g6(v);
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

double parse_metric(const std::string &s, std::string_view sentinel) {
  if (s == sentinel) return kNaN;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception &) {
    throw Error(ErrorCode::InvalidArgument, "bad numeric CSV field '" + s + "'");
  }
}

}  // namespace

std::string write_eval_csv(std::span<const EvalRecord> records) {
  std::ostringstream os;
  os << kEvalCsvHeader << '\n';
  for (const EvalRecord &r : records) {
    os << csv_field(r.volume_id) << ',' << csv_field(r.method) << ','
       << format_g6(r.dsc) << ',' << metric_field(r.ef, kEmptyGt) << ','
       << metric_field(r.h95_mm, kEmptyMask) << ','
       << metric_field(r.avd_percent, kEmptyGt) << ',' << format_g6(r.f1_lesion)
       << ',' << format_g6(r.recall_lesion) << ',' << format_g6(r.lesion_load_ml)
       << ',' << to_string(r.ll_bin) << '\n';
  }
  return os.str();
}

std::vector<EvalRecord> parse_eval_csv(std::string_view text) {
  std::vector<EvalRecord> out;
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (header) {
      if (line != kEvalCsvHeader) {
        throw Error(ErrorCode::InvalidArgument, "unexpected evaluation CSV header");
      }
      header = false;
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 10) {
      throw Error(ErrorCode::InvalidArgument, "evaluation CSV row needs 10 fields");
    }
    EvalRecord r;
    r.volume_id = f[0];
    r.method = f[1];
    r.dsc = parse_metric(f[2], "");
    r.ef = parse_metric(f[3], kEmptyGt);
    r.h95_mm = parse_metric(f[4], kEmptyMask);
    r.avd_percent = parse_metric(f[5], kEmptyGt);
    r.f1_lesion = parse_metric(f[6], "");
    r.recall_lesion = parse_metric(f[7], "");
    r.lesion_load_ml = parse_metric(f[8], "");
    r.ll_bin = parse_lesion_load_bin(f[9]);
    out.push_back(std::move(r));
  }
  if (header) throw Error(ErrorCode::InvalidArgument, "empty evaluation CSV");
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(GroupBy g) noexcept {
  switch (g) {
    case GroupBy::LesionLoad: return "ll_bin";
    case GroupBy::Scanner: return "scanner_tag";
    case GroupBy::Method: return "method";
  }
  return "ll_bin";
}

std::vector<SummaryRow> stratified_summary(
    std::span<const EvalRecord> records, GroupBy group_by,
    const std::map<std::string, std::string> &scanner_of) {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "no records to summarize");

  // Lesion-load groups keep their natural order; other keys sort lexically.
  auto key_of = [&](const EvalRecord &r) -> std::pair<int, std::string> {
    switch (group_by) {
      case GroupBy::LesionLoad:
        return {static_cast<int>(r.ll_bin), std::string(to_string(r.ll_bin))};
      case GroupBy::Method:
        return {0, r.method};
      case GroupBy::Scanner: {
        const auto it = scanner_of.find(r.volume_id);
        return {0, it == scanner_of.end() ? std::string("unknown") : it->second};
      }
    }
    return {0, ""};
  };

  using Getter = double EvalRecord::*;
  const std::array<std::pair<std::string_view, Getter>, 6> metrics{{
      {"dsc", &EvalRecord::dsc},
      {"ef", &EvalRecord::ef},
      {"h95_mm", &EvalRecord::h95_mm},
      {"avd_percent", &EvalRecord::avd_percent},
      {"f1_lesion", &EvalRecord::f1_lesion},
      {"recall_lesion", &EvalRecord::recall_lesion},
  }};

  std::map<std::pair<int, std::string>, std::vector<const EvalRecord *>> groups;
  for (const EvalRecord &r : records) groups[key_of(r)].push_back(&r);

  std::vector<SummaryRow> rows;
  for (const auto &[key, members] : groups) {
    for (const auto &[name, field] : metrics) {
      std::vector<double> vals;
      for (const EvalRecord *r : members) {
        if (!std::isnan(r->*field)) vals.push_back(r->*field);
      }
      SummaryRow row;
      row.group = key.second;
      row.metric = std::string(name);
      row.n = vals.size();
      if (vals.empty()) {
        row.mean = row.std = row.cov = kNaN;
        row.flag = "no_data";
        rows.push_back(std::move(row));
        continue;
      }
      const double n = static_cast<double>(vals.size());
      row.mean = std::accumulate(vals.begin(), vals.end(), 0.0) / n;
      if (vals.size() >= 2) {
        double ss = 0.0;
        for (double v : vals) ss += (v - row.mean) * (v - row.mean);
        row.std = std::sqrt(ss / n);
      } else {
        row.std = 0.0;
        row.flag = "single_sample";
      }
      if (row.mean == 0.0) {
        row.cov = kNaN;
        if (row.flag.empty()) row.flag = "zero_mean";
      } else {
        row.cov = row.std / row.mean;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string write_summary_csv(std::span<const SummaryRow> rows, GroupBy group_by) {
  std::ostringstream os;
  os << kSummaryCsvHeader << '\n';
  for (const SummaryRow &r : rows) {
    os << to_string(group_by) << ',' << csv_field(r.group) << ',' << r.metric << ','
       << r.n << ',' << format_g6(r.mean) << ',' << format_g6(r.std) << ','
       << format_g6(r.cov) << ',' << r.flag << '\n';
  }
  return os.str();
}

}  // namespace flairnorm
