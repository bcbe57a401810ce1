#pragma once

#include <cstddef>
#include <functional>

namespace elim {

/// Worker count: EINSTEIN_LIMITS_THREADS if set (>= 1), else the hardware
/// concurrency.
unsigned default_thread_count();

/// Runs body(begin, end) over contiguous chunks of [0, n) on up to `threads`
/// threads. Chunk boundaries depend only on n, so per-chunk results combined
/// in chunk order are identical for any thread count. If bodies throw, the
/// exception from the lowest-numbered chunk is rethrown.
void parallel_chunks(std::size_t n, std::size_t chunks, unsigned threads,
                     const std::function<void(std::size_t chunk, std::size_t begin, std::size_t end)>& body);

}  // namespace elim
