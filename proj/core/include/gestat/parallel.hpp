#pragma once

#include <cstddef>
#include <functional>

namespace gestat {

/// GESTAT_WORKERS if set to a positive integer, otherwise the hardware thread count.
int default_worker_count();

/// Calls job(i) for i in [0, count) on at most `workers` threads. The first
/// exception thrown by a job is rethrown after all threads have joined.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& job);

}  // namespace gestat
