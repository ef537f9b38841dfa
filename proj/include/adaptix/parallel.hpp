#pragma once

#include <cstddef>
#include <functional>

namespace adaptix {

/// Worker count: ADAPTIX_THREADS if set to a positive integer, otherwise
/// `fallback` (0 means hardware concurrency).
std::size_t resolve_threads(std::size_t fallback = 0);

/// Runs task(i) for i in [0, n) on up to `threads` workers. Tasks must not
/// throw; callers record failures themselves.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& task);

}  // namespace adaptix
