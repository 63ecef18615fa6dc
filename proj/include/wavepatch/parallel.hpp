#pragma once

#include <cstddef>
#include <functional>

namespace wavepatch {

/// Runs fn(i) for i in [0, count) on a pool of worker threads pulling from a
/// shared atomic counter.  jobs <= 0 uses the hardware concurrency.  The
/// first exception thrown by any task is rethrown on the calling thread and
/// remaining tasks are skipped.
void parallel_for(std::size_t count, int jobs,
                  const std::function<void(std::size_t)>& fn);

}  // namespace wavepatch
