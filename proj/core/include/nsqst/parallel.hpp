// Copyright 2026 The NSQST Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <functional>

namespace nsqst {

/// Process-wide cap on worker threads (the CLI's --threads flag). Zero means
/// hardware concurrency.
void set_worker_threads(unsigned threads);
unsigned worker_threads();

/// Runs body(i) for i in [0, count) on up to worker_threads() threads. Each
/// index is executed exactly once; callers write results into per-index
/// slots and reduce afterwards in index order, which keeps results
/// independent of the thread count. The first exception thrown is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace nsqst
