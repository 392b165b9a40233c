#pragma once

#include <functional>

namespace rydex {

/// Index-parallel loop over [0, n). Thread count comes from the
/// RYDEX_THREADS environment variable (default: hardware concurrency).
/// Each index must write only its own output slot, so results are
/// bit-identical for any thread count.
void parallel_for(int n, const std::function<void(int)>& fn);

int max_threads();

}  // namespace rydex
