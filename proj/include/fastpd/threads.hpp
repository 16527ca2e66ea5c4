#pragma once

#include <functional>

namespace fastpd {

// Resolves a requested thread count: values >= 1 are taken as-is; 0 or
// negative fall back to the FASTPD_THREADS environment variable and then to
// the hardware concurrency.
int resolve_threads(int requested);

// Runs fn(0..n-1), using up to `threads` worker threads. Work items may run
// in any order; callers own any ordering of result reduction. The first
// exception thrown by a work item is rethrown after all workers finish.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace fastpd
