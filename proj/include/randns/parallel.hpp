#pragma once

#include <cstddef>
#include <functional>

namespace randns {

/// Worker count from RANDNS_THREADS (default: hardware concurrency, at least 1).
int worker_count();

/// Run task(i) for i in [0, count) on up to `workers` threads pulling indices from a
/// shared counter. workers <= 0 uses worker_count(). The first exception thrown by a
/// task is rethrown after all workers stop.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task,
                  int workers = 0);

}  // namespace randns
