#pragma once

#include <cstddef>
#include <functional>

namespace uwr {

/// Runs fn(0..n-1) on up to `jobs` worker threads (0 = hardware concurrency).
/// Each index owns its output slot, so results are identical for any job
/// count. The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

unsigned resolve_jobs(unsigned jobs);

}  // namespace uwr
