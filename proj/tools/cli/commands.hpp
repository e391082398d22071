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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flairnorm/standardize.hpp"

namespace flairnorm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitPartial = 2;

struct NormalizeOptions {
  std::vector<std::string> inputs;
  std::string method;
  std::string out_dir;
  std::optional<std::string> scale_path;
  std::optional<std::string> pairs_path;
  PipelineParams params;
  std::size_t jobs = 0;  // 0 = all cores
  bool reproducible = false;
};

struct TrainNyulOptions {
  std::vector<std::string> inputs;
  std::string out_path;
  std::optional<std::string> pairs_path;
  std::size_t jobs = 0;
};

struct EvaluateOptions {
  std::vector<std::string> pred;
  std::vector<std::string> gt;
  std::string out_csv;
  std::string method = "none";
  double min_overlap = 0.0;
  std::size_t jobs = 0;
};

struct EnsembleOptions {
  std::vector<std::string> masks;
  std::string out_path;
};

struct ReportOptions {
  std::vector<std::string> inputs;
  std::vector<std::string> methods;
  std::string out_dir;
  std::optional<std::string> scale_path;
  std::optional<std::string> pairs_path;
  std::map<std::string, std::string> eval_csvs;  // method -> evaluation CSV
  PipelineParams params;
  bool paired = false;
  std::size_t jobs = 0;
  bool reproducible = false;
};

int cmd_normalize(const NormalizeOptions &options);
int cmd_train_nyul(const TrainNyulOptions &options);
int cmd_evaluate(const EvaluateOptions &options);
int cmd_ensemble(const EnsembleOptions &options);
int cmd_report(const ReportOptions &options);

/// Parses argv (argv[0] is the program name) and dispatches to a command.
/// Exit codes: 0 all ok, 1 usage or fatal error, 2 partial failure.
int run(int argc, const char *const *argv);
int run(const std::vector<std::string> &args);

/// Applies FLAIRNORM_LOG (trace, debug, info, warn, error, off).
void configure_logging();

}  // namespace flairnorm::cli
