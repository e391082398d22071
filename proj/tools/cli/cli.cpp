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
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "flairnorm/error.hpp"

namespace flairnorm::cli {

namespace {

void add_pipeline_flags(CLI::App &cmd, PipelineParams &p) {
  cmd.add_option("--reference-mode", p.reference_mode, "IAMLAB target mode")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--tau", p.tau, "White Stripe quantile half-width")
      ->check(CLI::Range(0.0, 0.5));
  cmd.add_option("--sigma-mm", p.sigma_mm, "bias-field lowpass sigma (mm)")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--bins", p.bins, "histogram bins")->check(CLI::Range(2, 1 << 20));
}

}  // namespace

void configure_logging() {
  auto logger = spdlog::stderr_logger_mt("flairnorm");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char *env = std::getenv("FLAIRNORM_LOG")) {
    spdlog::set_level(spdlog::level::from_str(env));
  }
}

int run(int argc, const char *const *argv) {
  CLI::App app{"Intensity standardization, mask fusion and evaluation for FLAIR MRI"};
  app.require_subcommand(1);

  NormalizeOptions norm;
  auto *normalize = app.add_subcommand("normalize", "standardize volume intensities");
  normalize->add_option("inputs", norm.inputs, "volumes or directories")->required();
  normalize->add_option("--method", norm.method,
                        "original, zscore, whitestripe, nyul or iamlab")
      ->required()
      ->check(CLI::IsMember({"original", "zscore", "whitestripe", "nyul", "iamlab"}));
  normalize->add_option("--out", norm.out_dir, "output directory")->required();
  normalize->add_option("--scale", norm.scale_path, "trained Nyul scale (JSON)");
  normalize->add_option("--pairs", norm.pairs_path, "JSON map of volume -> mask");
  normalize->add_option("--jobs", norm.jobs, "worker threads (0 = all cores)");
  normalize->add_flag("--reproducible", norm.reproducible, "omit timestamps");
  add_pipeline_flags(*normalize, norm.params);

  TrainNyulOptions train;
  auto *train_cmd = app.add_subcommand("train-nyul", "train a Nyul standard scale");
  train_cmd->add_option("inputs", train.inputs, "volumes or directories")->required();
  train_cmd->add_option("--out", train.out_path, "output scale JSON")->required();
  train_cmd->add_option("--pairs", train.pairs_path, "JSON map of volume -> mask");
  train_cmd->add_option("--jobs", train.jobs, "worker threads (0 = all cores)");

  EvaluateOptions eval;
  auto *evaluate = app.add_subcommand("evaluate", "score predicted lesion masks");
  evaluate->add_option("--pred", eval.pred, "predicted masks or directories")->required();
  evaluate->add_option("--gt", eval.gt, "ground-truth masks or directories")->required();
  evaluate->add_option("--out", eval.out_csv, "output CSV")->required();
  evaluate->add_option("--method", eval.method, "method tag written to each row");
  evaluate->add_option("--min-overlap", eval.min_overlap,
                       "lesion detection overlap fraction")
      ->check(CLI::Range(0.0, 1.0));
  evaluate->add_option("--jobs", eval.jobs, "worker threads (0 = all cores)");

  EnsembleOptions ens;
  auto *ensemble = app.add_subcommand("ensemble", "majority-vote fusion of masks");
  ensemble->add_option("masks", ens.masks, "input masks")->required();
  ensemble->add_option("--out", ens.out_path, "fused mask path")->required();

  ReportOptions rep;
  rep.methods = {"original", "zscore", "whitestripe", "nyul", "iamlab"};
  std::vector<std::string> eval_specs;
  auto *report = app.add_subcommand("report", "histogram alignment and significance report");
  report->add_option("inputs", rep.inputs, "volumes or directories")->required();
  report->add_option("--methods", rep.methods, "methods to compare")->delimiter(',');
  report->add_option("--out", rep.out_dir, "output directory")->required();
  report->add_option("--scale", rep.scale_path, "trained Nyul scale (JSON)");
  report->add_option("--pairs", rep.pairs_path, "JSON map of volume -> mask");
  report->add_option("--eval", eval_specs,
                     "METHOD=CSV evaluation tables for significance testing");
  report->add_flag("--paired", rep.paired, "paired instead of Welch t-tests");
  report->add_option("--jobs", rep.jobs, "worker threads (0 = all cores)");
  report->add_flag("--reproducible", rep.reproducible, "omit timestamps");
  add_pipeline_flags(*report, rep.params);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitFatal;
  }

  try {
    if (*normalize) return cmd_normalize(norm);
    if (*train_cmd) return cmd_train_nyul(train);
    if (*evaluate) return cmd_evaluate(eval);
    if (*ensemble) return cmd_ensemble(ens);
    if (*report) {
      for (const auto &spec : eval_specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0) {
          throw Error(ErrorCode::InvalidArgument, "--eval expects METHOD=CSV, got " + spec);
        }
        rep.eval_csvs[spec.substr(0, eq)] = spec.substr(eq + 1);
      }
      return cmd_report(rep);
    }
  } catch (const std::exception &e) {
    spdlog::error("{}", e.what());
    return kExitFatal;
  }
  return kExitFatal;
}

int run(const std::vector<std::string> &args) {
  std::vector<const char *> argv;
  argv.reserve(args.size());
  for (const auto &a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace flairnorm::cli
