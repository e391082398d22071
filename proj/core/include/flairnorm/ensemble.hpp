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

#include <span>

#include "flairnorm/volume.hpp"

namespace flairnorm {

/// Voxel-wise majority vote: a voxel is set iff strictly more than half of the
/// inputs set it, so exact ties with an even number of inputs give 0.
/// Needs at least two masks on the same grid.
Mask majority_vote(std::span<const Mask> masks);

}  // namespace flairnorm
