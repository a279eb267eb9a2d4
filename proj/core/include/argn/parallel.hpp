#pragma once

#include <cstddef>
#include <functional>

namespace argn {

/// Worker count: ARGN_THREADS if set and positive, otherwise hardware concurrency.
std::size_t worker_count();

/// Runs fn(i) for i in [0, n). Work is split into contiguous chunks, one per worker.
/// Callers write results into index-addressed slots so the outcome does not depend
/// on scheduling. The first exception thrown by any chunk is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace argn
