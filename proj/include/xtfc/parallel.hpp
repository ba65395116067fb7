// Copyright 2026 The xtfc-hjb Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <functional>

namespace xtfc {

/// Runs fn(chunk) for chunk in [0, num_chunks) on up to `threads` workers.
/// Work is split into caller-defined chunks, so any reduction the caller does
/// over per-chunk results in chunk order is independent of the thread count.
void parallel_for(std::size_t num_chunks, int threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace xtfc
