#pragma once

#include <cstddef>
#include <functional>

namespace finsler {

// Worker count: FINSLERLAB_THREADS if set and positive, else hardware concurrency.
unsigned thread_count();

// Runs body(i) for i in [0, n) across worker threads.  Results must be written
// to per-index slots; the first exception thrown is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace finsler
