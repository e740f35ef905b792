#pragma once

#include <functional>

namespace kf {

// Worker count for element-parallel loops; honors the KF_THREADS environment
// variable, clamped to [1, hardware_concurrency].
int worker_count();

// Runs fn(i) for i in [0, n). Results must be written to disjoint slots so the
// outcome is identical for any worker count; reductions are done serially by
// the caller.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace kf
