#pragma once

#include <cstddef>
#include <functional>

namespace cirforge {

// hardware_concurrency, capped by CIRFORGE_THREADS when set.
std::size_t worker_count();

// Runs fn(i) for i in [0, n) over contiguous chunks. fn must only write state
// owned by index i; results are then independent of the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace cirforge
