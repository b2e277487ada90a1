#pragma once

#include <cstddef>
#include <functional>

namespace tracelab {

// Worker count: TRACE_LAB_THREADS when set (>= 1), else the hardware count.
std::size_t thread_count();

// Runs body(i) for i in [0, n) on up to thread_count() threads. Results
// must be written to per-index slots; exceptions are rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace tracelab
