#pragma once

#include <cstddef>
#include <functional>

namespace csdflow {

// Worker count: CSDFLOW_THREADS if set (>= 1), else hardware concurrency.
std::size_t worker_count();

// Runs body(i) for i in [0, n) on up to worker_count() threads. Work is
// split into contiguous blocks; the first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace csdflow
