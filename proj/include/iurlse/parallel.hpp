#pragma once

#include <cstddef>
#include <functional>

namespace iurlse {

/// Worker count: IURLSE_THREADS if set and positive, else the hardware
/// concurrency (at least 1).
std::size_t worker_count();

/// Runs body(i) for i in [0, n), split into contiguous chunks across
/// worker_count() threads. Each index is visited exactly once; bodies must
/// only write to state owned by their index. Exceptions are rethrown on the
/// calling thread (first one by chunk order).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace iurlse
