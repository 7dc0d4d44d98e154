#pragma once

#include <cstddef>
#include <functional>

namespace anisomesh {

/// Worker count: ANISOMESH_THREADS if set (>= 1), else the hardware concurrency.
unsigned worker_count();

/// Calls body(i) for i in [0, n) on up to worker_count() threads. Iterations
/// are split into contiguous blocks; body must not touch shared mutable state.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace anisomesh
