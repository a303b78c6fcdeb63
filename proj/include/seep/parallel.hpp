#pragma once

#include <cstddef>
#include <functional>

namespace seep {

/// Worker count: SEEP_THREADS if set to a positive integer, else hardware concurrency.
std::size_t default_thread_count();

/// Runs body(begin, end) over contiguous chunks of [0, n). Chunk boundaries depend
/// only on n and threads, so callers writing into per-index slots stay deterministic.
void parallel_chunks(std::size_t n, std::size_t threads,
                     const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace seep
