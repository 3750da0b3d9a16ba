#pragma once

#include <cstddef>
#include <functional>

namespace lpmode {

// Runs fn(0..count-1) on up to `workers` threads. Items must be independent
// and write only to their own output slots; the results are then identical
// for any worker count. The first exception thrown by any item is rethrown
// on the calling thread after all workers join.
void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& fn);

} // namespace lpmode
