#pragma once

#include <functional>

namespace espbo {

int hardware_threads();

// Worker cap from the ESP_OPT_THREADS environment variable;
// 0 means "no cap set".
int env_thread_cap();

// Applies the environment cap and hardware count to a requested thread count.
// requested <= 0 means "as many as allowed".
int resolve_threads(int requested);

// Runs body(i) for i in [0, n), spread over up to `threads` workers.
// With threads <= 1 the loop runs inline on the calling thread. Bodies
// must write to disjoint locations; the first exception thrown by any
// worker is re-thrown on the caller.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

}  // namespace espbo
