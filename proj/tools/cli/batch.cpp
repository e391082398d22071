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
#include "cli/batch.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "flairnorm/error.hpp"

namespace flairnorm::cli {

namespace {

constexpr std::string_view kSuffixes[] = {".nii.gz", ".nii", ".hdr.gz", ".hdr"};

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::string stem_of(const fs::path &path) {
  const std::string name = path.filename().string();
  for (std::string_view suffix : kSuffixes) {
    if (ends_with(name, suffix)) return name.substr(0, name.size() - suffix.size());
  }
  return path.stem().string();
}

bool is_nifti(const fs::path &path) {
  const std::string name = path.filename().string();
  return std::any_of(std::begin(kSuffixes), std::end(kSuffixes),
                     [&](std::string_view s) { return ends_with(name, s); });
}

std::vector<fs::path> collect_inputs(const std::vector<std::string> &args,
                                     bool skip_masks) {
  std::vector<fs::path> out;
  for (const std::string &a : args) {
    const fs::path p(a);
    if (fs::is_directory(p)) {
      for (const auto &entry : fs::directory_iterator(p)) {
        if (!entry.is_regular_file() || !is_nifti(entry.path())) continue;
        if (skip_masks && ends_with(stem_of(entry.path()), "_mask")) continue;
        out.push_back(entry.path());
      }
    } else {
      out.push_back(p);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

MaskPairing MaskPairing::from_file(const fs::path &json_path) {
  MaskPairing pairing;
  try {
    const auto j = nlohmann::json::parse(read_text(json_path));
    for (const auto &[key, value] : j.items()) {
      pairing.explicit_[key] = value.get<std::string>();
    }
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::InvalidArgument,
                "bad pairing file " + json_path.string() + ": " + e.what());
  }
  return pairing;
}

std::optional<fs::path> MaskPairing::mask_for(const fs::path &volume) const {
  if (!explicit_.empty()) {
    for (const std::string &key : {volume.string(), stem_of(volume)}) {
      if (auto it = explicit_.find(key); it != explicit_.end()) {
        return fs::path(it->second);
      }
    }
    return std::nullopt;
  }
  const std::string stem = stem_of(volume);
  for (const char *suffix : {"_mask.nii.gz", "_mask.nii"}) {
    const fs::path candidate = volume.parent_path() / (stem + suffix);
    if (fs::exists(candidate)) return candidate;
  }
  return std::nullopt;
}

std::size_t default_jobs() {
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, std::size_t jobs,
                  const std::function<void(std::size_t)> &fn) {
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto &t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::string read_text(const fs::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void write_text(const fs::path &path, const std::string &text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::IoError, "cannot create " + path.string());
  os << text;
  if (!os) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace flairnorm::cli
