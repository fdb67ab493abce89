#pragma once

#include <functional>
#include <vector>

namespace stitch {

/// Runs fn(begin, end) over contiguous chunks of [0, n) on `threads` threads.
/// Chunking depends only on (n, threads), and chunks write disjoint data, so
/// results are bit-identical to a sequential run.
void parallel_for(long n, int threads, const std::function<void(long, long)>& fn);

/// Runs the tasks concurrently (one thread each beyond the first).
void parallel_invoke(const std::vector<std::function<void()>>& tasks,
                     int threads);

}  // namespace stitch
