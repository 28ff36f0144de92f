#pragma once

#include <cstddef>
#include <functional>

namespace brw {

/// Worker count for internal parallel loops. Defaults to 1; results never
/// depend on it because every reduction runs in a fixed order.
void set_thread_count(int n);
int thread_count();

/// Calls f(i) for i in [0, n), split into contiguous chunks across threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

}  // namespace brw
