#pragma once

#include <cstddef>
#include <functional>

namespace marketnet {

// Worker count: hardware concurrency, capped by MARKETNET_THREADS when set.
std::size_t thread_count();

// Runs body(i) for i in [0, n). Each index is executed exactly once; callers
// write results into per-index slots so output is independent of scheduling.
// The first exception thrown by any body is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace marketnet
