#pragma once

#include <cstddef>
#include <functional>

namespace cgolab {

/// Worker count: hardware concurrency, capped by the CGOLAB_THREADS environment variable.
int worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads. The first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace cgolab
