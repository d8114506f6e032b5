#pragma once

#include <cstddef>
#include <functional>

namespace ergolab {

// Process-wide default worker count (0 = hardware concurrency). Set once by
// the CLI; tests leave it at the default.
void set_default_threads(int n);
int default_threads();

// Runs fn(begin, end) over disjoint chunks of [0, n). All outputs must be
// written to per-index slots so the result is independent of the split.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn,
                  int threads = 0);

}  // namespace ergolab
