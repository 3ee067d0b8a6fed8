/*
 * Copyright 2026 The ipweval Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Deterministic parallel loop over an index range.
//
// Tasks are split into contiguous static partitions, one per worker, so
// each task index always runs exactly once and writes to its own slot;
// results are identical for any thread count. Exceptions thrown by tasks
// are captured and rethrown on the calling thread.

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace ipweval {

/// Number of workers to use: `requested` if positive, otherwise the
/// hardware concurrency (at least 1).
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Run fn(i) for every i in [0, n_tasks) across `n_threads` workers
/// (0 = hardware concurrency). fn must only write to per-index state.
template <typename Fn>
void parallel_for(std::size_t n_tasks, int n_threads, Fn&& fn) {
  const auto workers =
      static_cast<std::size_t>(resolve_threads(n_threads));
  if (n_tasks == 0) return;
  if (workers <= 1 || n_tasks == 1) {
    for (std::size_t i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  const std::size_t used = std::min(workers, n_tasks);
  std::vector<std::exception_ptr> errors(used);
  std::vector<std::thread> pool;
  pool.reserve(used);
  for (std::size_t w = 0; w < used; ++w) {
    pool.emplace_back([&, w]() {
      const std::size_t lo = n_tasks * w / used;
      const std::size_t hi = n_tasks * (w + 1) / used;
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);
}

}  // namespace ipweval
