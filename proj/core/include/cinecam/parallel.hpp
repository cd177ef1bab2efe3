#pragma once

#include <cstddef>
#include <functional>

namespace cinecam {

/// Runs fn(i) for i in [0, n). Work is split into contiguous index blocks,
/// one per worker, so results land in caller-owned slots and the outcome is
/// independent of scheduling. threads <= 1 runs inline.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  unsigned threads = 0);

/// Hardware concurrency, never 0.
unsigned default_threads();

}  // namespace cinecam
