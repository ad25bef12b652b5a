#pragma once

#include <cstddef>
#include <functional>

namespace lr {

// Worker count: LATENT_RIEMANN_THREADS when set to a positive integer,
// otherwise the hardware concurrency.
unsigned worker_count();

// Runs fn(i) for i in [0, n) over up to worker_count() threads. Indices are
// handed out in contiguous blocks, so per-index work must not depend on
// scheduling. The first exception thrown by any task is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace lr
