#pragma once

#include <cstddef>
#include <functional>

namespace lutzlab {

// Worker count: hardware concurrency, capped by LUTZLAB_THREADS when set.
std::size_t thread_count();

// Calls fn(i) for i in [0, n) on up to thread_count() workers. Each index is
// handled exactly once, so results written to slot i are independent of the
// worker count. The first exception thrown by fn is rethrown after all
// workers have stopped.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  std::size_t threads = 0);

}  // namespace lutzlab
