#pragma once

#include <cstddef>
#include <functional>

namespace sbfa {

// Number of worker threads. Reads SBFA_WORKERS once; falls back to the
// hardware count. Always >= 1.
int worker_count();

// Runs fn(i) for i in [0, n) across workers with a static contiguous
// partition. Each index must be independent of the others, so results do not
// depend on the worker count. Exceptions from workers are rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace sbfa
