#pragma once

#include <cstddef>
#include <functional>

namespace keymix {

/// Number of worker threads used by parallel_for. Honors KEYMIX_THREADS.
std::size_t worker_count();

/// Calls fn(i) for every i in [0, n) across worker threads. Each index is
/// visited exactly once; callers write results by index so output does not
/// depend on scheduling. The first exception thrown by fn is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace keymix
