//
// comove - co-moving stereo toolkit
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <functional>

namespace comove {

// Process-wide worker count for the parallel loops (default 1).
void set_thread_count(int threads);
int thread_count();

// Calls fn(i) for i in [0, n). Each index is visited exactly once; callers
// write results into per-index slots so the outcome does not depend on the
// thread count. The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace comove
