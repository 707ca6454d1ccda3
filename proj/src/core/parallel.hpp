#pragma once

#include <functional>

namespace lcamv {

/// Process-wide worker count for raster loops. 0 = hardware concurrency.
/// Initialized from the LCAMV_THREADS environment variable.
void set_thread_count(int n);
int thread_count();

/// Runs fn(begin, end) over contiguous row blocks, possibly on several
/// threads. Blocks are a fixed deterministic partition of [0, rows), so any
/// per-row output is bit-identical regardless of the worker count. Do not
/// reduce across rows inside fn.
void parallel_rows(int rows, const std::function<void(int, int)>& fn);

}  // namespace lcamv
