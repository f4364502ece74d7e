#pragma once

#include <cstddef>
#include <functional>

namespace kunn {

/// Number of worker threads to use.  Reads KUNN_THREADS once (clamped to at
/// least 1); falls back to std::thread::hardware_concurrency().
std::size_t thread_count();

/// Run fn(i) for i in [0, n).  Work is split into contiguous chunks, one
/// per thread, so each index is processed exactly once and writes to
/// per-index outputs are race free.  Results are bitwise independent of the
/// thread count as long as fn(i) touches only state owned by index i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace kunn
