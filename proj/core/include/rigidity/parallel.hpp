#pragma once

#include <cstddef>
#include <functional>

namespace rigidity {

/// Caps the worker count used by parallel_for (0 = hardware concurrency).
void set_max_threads(unsigned count);
unsigned max_threads();

/// Runs body(begin, end) over contiguous chunks of [0, n). Each index is
/// visited exactly once; callers write results by index so the outcome does
/// not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t grain = 1024);

}  // namespace rigidity
