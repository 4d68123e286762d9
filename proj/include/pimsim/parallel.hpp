#pragma once

#include <cstddef>
#include <functional>

namespace pimsim {

// Hardware concurrency capped by the PIMSIM_THREADS environment variable.
unsigned default_thread_count();

// Splits [0, count) into `threads` contiguous chunks and runs fn(chunk_index,
// begin, end) on each. Chunk boundaries depend only on count and threads.
// An exception from the lowest-numbered failing chunk is rethrown after join.
void parallel_chunks(std::size_t count, unsigned threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

}  // namespace pimsim
