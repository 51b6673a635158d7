/* Copyright 2026 The Drivedet Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef DRIVEDET_PARALLEL_H_
#define DRIVEDET_PARALLEL_H_

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

#include "absl/status/status.h"

namespace drivedet {

// Calls fn(i) for i in [0, n) on up to `jobs` threads. Work is handed out by
// an atomic counter; callers write results into per-index slots. Returns the
// error of the lowest failing index, if any.
inline absl::Status ParallelFor(std::size_t n, int jobs,
                                const std::function<absl::Status(std::size_t)>& fn) {
  std::vector<absl::Status> status(n);
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      status[i] = fn(i);
      if (!status[i].ok()) return status[i];
    }
    return absl::OkStatus();
  }
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) status[i] = fn(i);
      });
    }
  }
  for (const auto& s : status) {
    if (!s.ok()) return s;
  }
  return absl::OkStatus();
}

}  // namespace drivedet

#endif  // DRIVEDET_PARALLEL_H_
