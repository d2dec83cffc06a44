#pragma once

#include <cstddef>
#include <functional>

namespace causalwr {

// Process-wide cap on worker threads used by library loops. Results never
// depend on this value: work is split by index and reduced in index order.
void set_thread_limit(unsigned threads);
unsigned thread_limit();

// Runs body(i) for i in [0, count) across up to thread_limit() workers.
// The first exception thrown by any worker is rethrown on the caller.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace causalwr
