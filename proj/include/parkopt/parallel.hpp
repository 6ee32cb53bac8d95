#pragma once

#include <cstddef>
#include <functional>

namespace parkopt {

// Worker count: PARKOPT_THREADS when set to a positive integer, otherwise
// the hardware concurrency (at least 1).
std::size_t thread_budget();

// Runs body(i) for every i in [0, n). Indices are split into contiguous
// static chunks, one per worker, so per-index results written by the body
// land in fixed slots no matter how threads are scheduled. The first
// exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace parkopt
