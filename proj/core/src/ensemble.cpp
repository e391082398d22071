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
#include "flairnorm/ensemble.hpp"

#include <vector>

#include "flairnorm/error.hpp"

namespace flairnorm {

Mask majority_vote(std::span<const Mask> masks) {
  if (masks.size() < 2) {
    throw Error(ErrorCode::TooFewMasks, "majority vote needs at least 2 masks");
  }
  const Dims &dims = masks.front().dims();
  for (const Mask &m : masks) require_same_dims(dims, m.dims(), "majority_vote");

  std::vector<std::uint32_t> votes(dims.count(), 0);
  for (const Mask &m : masks) {
    const auto b = m.bits();
    for (std::size_t i = 0; i < votes.size(); ++i) votes[i] += b[i];
  }
  const std::size_t n = masks.size();
  std::vector<std::uint8_t> out(votes.size());
  for (std::size_t i = 0; i < votes.size(); ++i) out[i] = 2 * votes[i] > n ? 1 : 0;
  return Mask(dims, std::move(out), masks.front().kind());
}

}  // namespace flairnorm
