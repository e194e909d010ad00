#pragma once

#include <functional>

namespace holab {

// Thread cap: HOLAB_THREADS when set, otherwise hardware concurrency.
int max_threads();

// Runs f(0..n-1), fanning out across at most max_threads() threads. Work
// items must be independent; results are merged by index by the caller, so
// any execution order gives identical output.
void parallel_for(int n, const std::function<void(int)>& f);

}  // namespace holab
