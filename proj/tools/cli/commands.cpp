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
#include "cli/commands.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

#include "cli/batch.hpp"
#include "flairnorm/ensemble.hpp"
#include "flairnorm/error.hpp"
#include "flairnorm/metrics.hpp"
#include "flairnorm/nifti.hpp"
#include "flairnorm/stats.hpp"

namespace flairnorm::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr const char *kMetrics[] = {"dsc",         "ef",        "h95_mm",
                                    "avd_percent", "f1_lesion", "recall_lesion"};

std::size_t jobs_or_default(std::size_t jobs) {
  return jobs == 0 ? default_jobs() : jobs;
}

json params_json(const PipelineParams &p, const std::optional<std::string> &scale_path) {
  json j;
  j["reference_mode"] = p.reference_mode;
  j["tau"] = p.tau;
  j["sigma_mm"] = p.sigma_mm;
  j["bins"] = p.bins;
  j["smooth_bins"] = p.smooth_bins;
  j["scale"] = scale_path ? json(*scale_path) : json();
  return j;
}

void stamp(json &manifest, bool reproducible) {
  if (!reproducible) manifest["created_at"] = utc_timestamp();
}

struct LoadedPair {
  std::string id;
  fs::path volume_path;
  fs::path mask_path;
  std::optional<Volume> volume;
  std::optional<Mask> mask;
  std::string error;
};

/// Loads every volume with its ICV mask; failures are recorded, not thrown.
std::vector<LoadedPair> load_pairs(const std::vector<fs::path> &inputs,
                                   const MaskPairing &pairing, std::size_t jobs) {
  std::vector<LoadedPair> pairs(inputs.size());
  parallel_for(inputs.size(), jobs, [&](std::size_t i) {
    LoadedPair &p = pairs[i];
    p.id = stem_of(inputs[i]);
    p.volume_path = inputs[i];
    try {
      const auto mask_path = pairing.mask_for(inputs[i]);
      if (!mask_path) {
        throw Error(ErrorCode::MissingParams, "no mask found for " + inputs[i].string());
      }
      p.mask_path = *mask_path;
      p.volume.emplace(nifti::read_volume(inputs[i]));
      p.mask.emplace(nifti::read_mask(*mask_path, MaskKind::ICV));
      require_same_dims(p.volume->dims(), p.mask->dims(), "volume vs mask");
    } catch (const std::exception &e) {
      p.volume.reset();
      p.mask.reset();
      p.error = e.what();
      spdlog::error("{}: {}", inputs[i].string(), p.error);
    }
  });
  return pairs;
}

MaskPairing pairing_for(const std::optional<std::string> &pairs_path) {
  return pairs_path ? MaskPairing::from_file(*pairs_path) : MaskPairing{};
}

SampleType output_type(Method method, const Volume &out) {
  if (method == Method::Original && nifti::representable(out, out.source_type())) {
    return out.source_type();
  }
  return SampleType::Float32;
}

std::map<std::string, fs::path> by_stem(const std::vector<fs::path> &files) {
  std::map<std::string, fs::path> m;
  for (const auto &f : files) m[stem_of(f)] = f;
  return m;
}

fs::path summary_path_for(const fs::path &csv) {
  return csv.parent_path() / (csv.stem().string() + "_summary.csv");
}

}  // namespace

// ---------------------------------------------------------------------------

int cmd_normalize(const NormalizeOptions &o) {
  const Method method = parse_method(o.method);
  PipelineParams params = o.params;
  if (o.scale_path) params.scale = scale_from_json(read_text(*o.scale_path));
  if (method == Method::Nyul && !params.scale) {
    throw Error(ErrorCode::MissingParams, "--method nyul requires --scale");
  }
  const auto inputs = collect_inputs(o.inputs, true);
  if (inputs.empty()) throw Error(ErrorCode::EmptyInput, "no input volumes");
  const fs::path out_dir(o.out_dir);
  fs::create_directories(out_dir);
  const MaskPairing pairing = pairing_for(o.pairs_path);

  struct Result {
    std::string mask;
    std::string output;
    std::string error;
  };
  std::vector<Result> results(inputs.size());
  parallel_for(inputs.size(), jobs_or_default(o.jobs), [&](std::size_t i) {
    Result &r = results[i];
    try {
      const auto mask_path = pairing.mask_for(inputs[i]);
      if (!mask_path) {
        throw Error(ErrorCode::MissingParams, "no mask found for " + inputs[i].string());
      }
      r.mask = mask_path->string();
      const Volume volume = nifti::read_volume(inputs[i]);
      const Mask mask = nifti::read_mask(*mask_path, MaskKind::ICV);
      const Volume out = run_pipeline(volume, mask, method, params);
      const std::string name = stem_of(inputs[i]) + "_" + o.method + ".nii.gz";
      nifti::write_volume(out, out_dir / name, output_type(method, out));
      r.output = name;
      spdlog::info("normalized {} -> {}", inputs[i].string(), name);
    } catch (const std::exception &e) {
      r.error = e.what();
      spdlog::error("{}: {}", inputs[i].string(), r.error);
    }
  });

  json manifest;
  manifest["command"] = "normalize";
  manifest["method"] = o.method;
  manifest["params"] = params_json(params, o.scale_path);
  stamp(manifest, o.reproducible);
  manifest["files"] = json::array();
  bool failed = false;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const Result &r = results[i];
    json f;
    f["input"] = inputs[i].string();
    f["mask"] = r.mask.empty() ? json() : json(r.mask);
    f["output"] = r.output.empty() ? json() : json(r.output);
    f["status"] = r.error.empty() ? "ok" : "failed";
    if (!r.error.empty()) f["error"] = r.error;
    failed |= !r.error.empty();
    manifest["files"].push_back(std::move(f));
  }
  write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return failed ? kExitPartial : kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_train_nyul(const TrainNyulOptions &o) {
  const auto inputs = collect_inputs(o.inputs, true);
  if (inputs.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no training volumes");
  const auto pairs = load_pairs(inputs, pairing_for(o.pairs_path), jobs_or_default(o.jobs));

  std::vector<NyulSample> samples;
  bool failed = false;
  for (const auto &p : pairs) {
    if (p.volume) {
      samples.push_back({*p.volume, *p.mask});
    } else {
      failed = true;
    }
  }
  const StandardScale scale = nyul_train(samples);
  const fs::path out(o.out_path);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_text(out, to_json(scale));
  spdlog::info("trained standard scale on {} volumes -> {}", samples.size(), o.out_path);
  return failed ? kExitPartial : kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_evaluate(const EvaluateOptions &o) {
  const auto preds = by_stem(collect_inputs(o.pred, false));
  const auto gts = by_stem(collect_inputs(o.gt, false));
  bool failed = false;

  std::vector<std::string> ids;
  for (const auto &[stem, path] : gts) {
    if (preds.count(stem)) {
      ids.push_back(stem);
    } else {
      spdlog::warn("unpaired ground truth skipped: {}", path.string());
      failed = true;
    }
  }
  for (const auto &[stem, path] : preds) {
    if (!gts.count(stem)) {
      spdlog::warn("unpaired prediction skipped: {}", path.string());
      failed = true;
    }
  }
  if (ids.empty()) throw Error(ErrorCode::EmptyInput, "no prediction/ground-truth pairs");

  std::vector<std::optional<EvalRecord>> rows(ids.size());
  const DetectionOptions det{o.min_overlap};
  parallel_for(ids.size(), jobs_or_default(o.jobs), [&](std::size_t i) {
    const fs::path &gt_path = gts.at(ids[i]);
    const fs::path &pred_path = preds.at(ids[i]);
    try {
      const Mask gt = nifti::read_mask(gt_path, MaskKind::WML);
      const Mask pred = nifti::read_mask(pred_path, MaskKind::WML);
      const Spacing spacing = nifti::header_spacing(nifti::read_header(gt_path));
      rows[i] = evaluate_pair(ids[i], o.method, pred, gt, spacing, det);
      if (gt.count() == 0) {
        spdlog::warn("{}: empty ground truth; EF/AVD/H95 flagged", ids[i]);
      }
    } catch (const std::exception &e) {
      spdlog::error("{}: {}", ids[i], e.what());
    }
  });

  std::vector<EvalRecord> records;
  for (auto &r : rows) {
    if (r) {
      records.push_back(std::move(*r));
    } else {
      failed = true;
    }
  }
  const fs::path out(o.out_csv);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_text(out, write_eval_csv(records));
  if (!records.empty()) {
    const auto summary = stratified_summary(records, GroupBy::LesionLoad);
    write_text(summary_path_for(out), write_summary_csv(summary, GroupBy::LesionLoad));
  }
  spdlog::info("evaluated {} pairs -> {}", records.size(), o.out_csv);
  return failed ? kExitPartial : kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_ensemble(const EnsembleOptions &o) {
  if (o.masks.size() < 2) {
    throw Error(ErrorCode::TooFewMasks, "ensemble needs at least 2 masks");
  }
  std::vector<Mask> masks;
  masks.reserve(o.masks.size());
  for (const auto &p : o.masks) masks.push_back(nifti::read_mask(p, MaskKind::WML));
  const Spacing spacing = nifti::header_spacing(nifti::read_header(o.masks.front()));
  const Mask fused = majority_vote(masks);
  const fs::path out(o.out_path);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  nifti::write_mask(fused, spacing, out);
  spdlog::info("fused {} masks -> {}", masks.size(), o.out_path);
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_report(const ReportOptions &o) {
  std::vector<Method> methods;
  for (const auto &m : o.methods) methods.push_back(parse_method(m));
  if (methods.empty()) throw Error(ErrorCode::InvalidArgument, "no methods requested");

  const auto inputs = collect_inputs(o.inputs, true);
  if (inputs.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "report needs at least 2 volumes");
  }
  const fs::path out_dir(o.out_dir);
  fs::create_directories(out_dir);
  const std::size_t jobs = jobs_or_default(o.jobs);
  const auto pairs = load_pairs(inputs, pairing_for(o.pairs_path), jobs);

  json manifest;
  manifest["command"] = "report";
  manifest["params"] = params_json(o.params, o.scale_path);
  stamp(manifest, o.reproducible);
  bool failed = false;

  json load_status = json::array();
  for (const auto &p : pairs) {
    json s;
    s["input"] = p.volume_path.string();
    s["status"] = p.error.empty() ? "ok" : "failed";
    if (!p.error.empty()) s["error"] = p.error;
    failed |= !p.error.empty();
    load_status.push_back(std::move(s));
  }
  manifest["inputs"] = std::move(load_status);

  PipelineParams params = o.params;
  if (std::find(methods.begin(), methods.end(), Method::Nyul) != methods.end()) {
    if (o.scale_path) {
      params.scale = scale_from_json(read_text(*o.scale_path));
    } else {
      std::vector<NyulSample> samples;
      for (const auto &p : pairs)
        if (p.volume) samples.push_back({*p.volume, *p.mask});
      try {
        params.scale = nyul_train(samples);
        manifest["nyul_scale"] = "trained on report inputs";
      } catch (const std::exception &e) {
        manifest["nyul_scale"] = std::string("training failed: ") + e.what();
      }
    }
  }

  std::ostringstream kl_summary, kl_volumes, hist_csv;
  kl_summary << "method,n_volumes,mean_kl\n";
  kl_volumes << "method,volume_id,kl\n";
  hist_csv << "method,volume_id,bin,lo,hi,count\n";
  json method_status = json::object();

  for (const Method method : methods) {
    const std::string name(to_string(method));
    std::vector<std::optional<Volume>> processed(pairs.size());
    std::vector<std::string> errors(pairs.size());
    parallel_for(pairs.size(), jobs, [&](std::size_t i) {
      if (!pairs[i].volume) return;
      try {
        processed[i] = run_pipeline(*pairs[i].volume, *pairs[i].mask, method, params);
      } catch (const std::exception &e) {
        errors[i] = e.what();
        spdlog::error("{} [{}]: {}", pairs[i].id, name, errors[i]);
      }
    });

    json status;
    status["failed"] = json::array();
    std::vector<AlignmentInput> aligned;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (processed[i]) {
        aligned.push_back({pairs[i].id, *processed[i], *pairs[i].mask});
      } else if (pairs[i].volume) {
        status["failed"].push_back({{"volume_id", pairs[i].id}, {"error", errors[i]}});
        failed = true;
      }
    }
    try {
      const AlignmentReport rep = dataset_alignment_report(aligned, name, o.params.bins);
      kl_summary << name << ',' << rep.records.size() << ',' << format_g6(rep.mean_kl) << '\n';
      for (std::size_t k = 0; k < rep.records.size(); ++k) {
        const auto &rec = rep.records[k];
        kl_volumes << name << ',' << rec.volume_id << ',' << format_g6(rec.kl_divergence) << '\n';
        const Histogram &h = rep.histograms[k];
        for (std::size_t b = 0; b < h.bins(); ++b) {
          hist_csv << name << ',' << rec.volume_id << ',' << b << ','
                   << format_g6(h.edges()[b]) << ',' << format_g6(h.edges()[b + 1]) << ','
                   << format_g6(h.counts()[b]) << '\n';
        }
      }
      status["mean_kl"] = rep.mean_kl;
      status["n_volumes"] = rep.records.size();
    } catch (const std::exception &e) {
      status["error"] = e.what();
      failed = true;
      spdlog::error("alignment for {} failed: {}", name, e.what());
    }
    method_status[name] = std::move(status);
  }
  manifest["methods"] = std::move(method_status);

  write_text(out_dir / "kl_summary.csv", kl_summary.str());
  write_text(out_dir / "kl_per_volume.csv", kl_volumes.str());
  write_text(out_dir / "histograms.csv", hist_csv.str());

  if (!o.eval_csvs.empty()) {
    std::map<std::string, std::vector<EvalRecord>> evals;
    for (const auto &[m, path] : o.eval_csvs) evals[m] = parse_eval_csv(read_text(path));
    const auto orig = evals.find("original");
    if (orig == evals.end()) {
      manifest["significance"] = "skipped: no evaluation CSV for 'original'";
      failed = true;
    } else {
      std::vector<stats::SignificanceResult> results;
      std::ostringstream deltas;
      deltas << "method,volume_id,delta_dsc\n";
      json improvement = json::object();
      for (auto &[m, recs] : evals) {
        if (m == "original") continue;
        // Tag by the method the CSV was supplied for.
        for (auto &r : recs) r.method = m;
        for (const char *metric : kMetrics) {
          try {
            results.push_back(stats::compare_metric(recs, orig->second, metric, o.paired));
          } catch (const std::exception &e) {
            stats::SignificanceResult r;
            r.metric = metric;
            r.method = m;
            r.test = {std::nan(""), std::nan(""), std::nan("")};
            r.note = e.what();
            results.push_back(std::move(r));
          }
        }
        try {
          const auto imp = stats::dsc_improvement(recs, orig->second);
          for (const auto &d : imp.deltas) {
            deltas << m << ',' << d.volume_id << ',' << format_g6(d.delta) << '\n';
          }
          improvement[m] = {{"improved", imp.improved},
                            {"n", imp.deltas.size()},
                            {"fraction_improved", imp.fraction_improved}};
        } catch (const std::exception &e) {
          improvement[m] = {{"error", e.what()}};
          failed = true;
        }
      }
      write_text(out_dir / "significance.json", stats::significance_json(results));
      write_text(out_dir / "dsc_improvement.csv", deltas.str());
      manifest["dsc_improvement"] = std::move(improvement);
    }
  }

  write_text(out_dir / "report_manifest.json", manifest.dump(2) + "\n");
  return failed ? kExitPartial : kExitOk;
}

}  // namespace flairnorm::cli
