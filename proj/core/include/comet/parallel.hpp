// Copyright 2026 The COMET Authors
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

namespace comet {

/// Caps worker threads used by library kernels (1 = fully serial).
void set_num_threads(std::size_t n);
std::size_t num_threads() noexcept;

/// Runs `body(begin, end)` over fixed chunks of `grain` items. Chunk
/// boundaries depend only on (n, grain), never on the thread count, so any
/// body that writes disjoint outputs per chunk is bit-identical across
/// thread settings.
void parallel_for(std::size_t n, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace comet
