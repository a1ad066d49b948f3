#pragma once

#include <cstddef>
#include <functional>

namespace glmebic {

/// Worker count from GLMEBIC_THREADS when set, else the hardware concurrency.
std::size_t default_thread_count();

/// Runs body(i) for i in [0, count) on up to `threads` workers. Callers write
/// results into per-index slots, so output never depends on scheduling. If
/// any body throws, the exception from the lowest index is rethrown after all
/// workers finish.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace glmebic
