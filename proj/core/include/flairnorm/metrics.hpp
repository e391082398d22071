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

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flairnorm/histogram.hpp"
#include "flairnorm/volume.hpp"

namespace flairnorm {

// ---------------------------------------------------------------------------
// Overlap and volume metrics

/// 2|P n G| / (|P| + |G|); 1 when both masks are empty.
double dsc(const Mask &pred, const Mask &gt);

/// False-positive voxels relative to the ground-truth size, |P \ G| / |G|.
double extra_fraction(const Mask &pred, const Mask &gt);

/// Absolute volume difference as a percentage of the ground-truth volume.
double avd(const Mask &pred, const Mask &gt, const Spacing &spacing);

// ---------------------------------------------------------------------------
// Surface distance

/// Foreground voxels with a background face-neighbour or lying on the grid
/// edge, as linear indices in ascending order.
std::vector<std::size_t> boundary_voxels(const Mask &mask);

/// Distance in mm from every boundary voxel of `from` to the nearest boundary
/// voxel of `to`, in ascending index order of `from`'s boundary.
std::vector<double> directed_surface_distances(const Mask &from, const Mask &to,
                                               const Spacing &spacing);

/// 95th-percentile symmetric surface distance: the larger of the two directed
/// 95th percentiles (linear interpolation between order statistics).
double h95(const Mask &pred, const Mask &gt, const Spacing &spacing);

// ---------------------------------------------------------------------------
// Lesion-wise detection

struct Components {
  std::vector<std::int32_t> labels;  // 0 = background, 1..count
  std::size_t count = 0;
};

/// Connected components of the foreground under 26-connectivity.
Components label_components(const Mask &mask);

struct DetectionOptions {
  /// A lesion counts as hit when it shares at least one voxel with the other
  /// mask and the shared fraction of its own voxels is at least this value.
  double min_overlap_fraction = 0.0;
};

struct LesionDetection {
  double f1 = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  std::size_t n_gt_lesions = 0;
  std::size_t n_pred_lesions = 0;
};

/// Lesion-wise recall, precision and F1. Both masks empty gives a perfect
/// score; otherwise an undefined ratio counts as 0.
LesionDetection lesion_detection(const Mask &pred, const Mask &gt,
                                 const DetectionOptions &options = {});

// ---------------------------------------------------------------------------
// Histogram alignment

inline constexpr double kDefaultKlEpsilon = 1e-10;

/// KL(p || q) after adding epsilon to every bin of both histograms and
/// renormalizing. Both inputs must be normalized and share edges.
double kl_divergence(const Histogram &p, const Histogram &q,
                     double epsilon = kDefaultKlEpsilon);

struct KlRecord {
  std::string volume_id;
  double kl_divergence = 0.0;
  std::string method;
};

struct AlignmentInput {
  std::string volume_id;
  const Volume &volume;
  const Mask &mask;
};

struct AlignmentReport {
  std::string method;
  std::vector<KlRecord> records;       // sorted by volume_id
  std::vector<Histogram> histograms;   // parallel to records, normalized
  std::optional<Histogram> mean_histogram;
  double mean_kl = 0.0;
};

/// Histograms every volume on one shared grid (union of masked ranges),
/// averages them, and scores each volume against the average.
AlignmentReport dataset_alignment_report(std::span<const AlignmentInput> inputs,
                                         std::string method,
                                         std::size_t bins = kDefaultBins,
                                         double epsilon = kDefaultKlEpsilon);

// ---------------------------------------------------------------------------
// Evaluation records

enum class LesionLoadBin { LT10, TEN_TO_25, GE25 };

/// Lower edges are inclusive: 10.0 mL falls in TEN_TO_25.
LesionLoadBin lesion_load_bin(double ml) noexcept;
std::string_view to_string(LesionLoadBin bin) noexcept;
LesionLoadBin parse_lesion_load_bin(std::string_view s);

/// One row of the evaluation table. Undefined metrics are NaN: EF and AVD
/// with an empty ground truth, H95 when either mask is empty.
struct EvalRecord {
  std::string volume_id;
  std::string method;
  double dsc = 0.0;
  double ef = 0.0;
  double h95_mm = 0.0;
  double avd_percent = 0.0;
  double f1_lesion = 0.0;
  double recall_lesion = 0.0;
  double lesion_load_ml = 0.0;  // of the ground truth
  LesionLoadBin ll_bin = LesionLoadBin::LT10;
};

/// Runs every metric on one prediction / ground-truth pair.
EvalRecord evaluate_pair(std::string volume_id, std::string method,
                         const Mask &pred, const Mask &gt, const Spacing &spacing,
                         const DetectionOptions &options = {});

inline constexpr std::string_view kEvalCsvHeader =
    "volume_id,method,dsc,ef,h95_mm,avd_percent,f1_lesion,recall_lesion,"
    "lesion_load_ml,ll_bin";

/// Header plus one line per record; floats use 6 significant digits and
/// undefined metrics are written as the name of the condition
/// ("EmptyGroundTruth" for EF/AVD, "EmptyMask" for H95).
std::string write_eval_csv(std::span<const EvalRecord> records);
std::vector<EvalRecord> parse_eval_csv(std::string_view text);

/// Formats with 6 significant digits ("%.6g").
std::string format_g6(double v);

// ---------------------------------------------------------------------------
// Stratified summaries

enum class GroupBy { LesionLoad, Scanner, Method };

std::string_view to_string(GroupBy g) noexcept;

struct SummaryRow {
  std::string group;
  std::string metric;
  std::size_t n = 0;
  double mean = 0.0;
  double std = 0.0;   // population
  double cov = 0.0;   // std / mean; NaN when the mean is 0
  std::string flag;   // "", "single_sample", "zero_mean" or "no_data"
};

/// Per-group mean, standard deviation and coefficient of variation of each
/// metric. NaN metric values are left out of their group. `scanner_of` maps
/// volume_id to a scanner tag for GroupBy::Scanner ("unknown" if absent).
std::vector<SummaryRow> stratified_summary(
    std::span<const EvalRecord> records, GroupBy group_by,
    const std::map<std::string, std::string> &scanner_of = {});

inline constexpr std::string_view kSummaryCsvHeader =
    "group_by,group,metric,n,mean,std,cov,flag";

std::string write_summary_csv(std::span<const SummaryRow> rows, GroupBy group_by);

}  // namespace flairnorm
