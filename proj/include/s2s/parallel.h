// Copyright 2026 The s2s-offroad Authors
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

#ifndef S2S_PARALLEL_H_
#define S2S_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace s2s {

// Worker count: S2S_THREADS when set to a positive integer, otherwise the
// hardware concurrency (at least 1).
int ThreadCount();

// Runs fn(index, worker) for index in [0, n) on up to `threads` workers
// (0 means ThreadCount()). Indices are claimed dynamically, so results must
// be written by index. The first exception thrown is rethrown.
void ParallelFor(size_t n, const std::function<void(size_t index, int worker)>& fn,
                 int threads = 0);

}  // namespace s2s

#endif  // S2S_PARALLEL_H_
