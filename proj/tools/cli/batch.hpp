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
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace flairnorm::cli {

namespace fs = std::filesystem;

/// File name without its NIfTI suffix (.nii, .nii.gz, .hdr, .hdr.gz).
std::string stem_of(const fs::path &path);

bool is_nifti(const fs::path &path);

/// Expands directories into their NIfTI files (non-recursive) and sorts the
/// result. With `skip_masks`, names ending in "_mask" are dropped.
std::vector<fs::path> collect_inputs(const std::vector<std::string> &args,
                                     bool skip_masks);

/// Resolves volume -> mask pairs. An explicit pairing file (JSON object of
/// volume path or stem -> mask path) takes precedence; otherwise a sibling
/// "<stem>_mask.nii.gz" or "<stem>_mask.nii" is used.
class MaskPairing {
 public:
  MaskPairing() = default;
  static MaskPairing from_file(const fs::path &json_path);

  std::optional<fs::path> mask_for(const fs::path &volume) const;

 private:
  std::map<std::string, std::string> explicit_;
};

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Exceptions escaping fn
/// are rethrown after all workers finish.
void parallel_for(std::size_t n, std::size_t jobs,
                  const std::function<void(std::size_t)> &fn);

std::size_t default_jobs();

std::string read_text(const fs::path &path);
void write_text(const fs::path &path, const std::string &text);

/// UTC ISO-8601 timestamp.
std::string utc_timestamp();

}  // namespace flairnorm::cli
