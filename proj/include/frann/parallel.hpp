#pragma once

#include <cstddef>
#include <functional>

namespace frann {

// Worker count: FRANN_THREADS if set (minimum 1), else hardware concurrency.
std::size_t thread_count();

// Runs fn(i) for i in [0, n) across workers. Deterministic static chunking;
// fn must not touch shared mutable state except per-index slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// Runs fn(worker, lo, hi) once per contiguous chunk; worker < thread_count().
// Useful when each worker carries private scratch merged by the caller.
void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

}  // namespace frann
