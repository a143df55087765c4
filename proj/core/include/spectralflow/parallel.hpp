#pragma once

#include <cstddef>
#include <functional>

namespace spectralflow {

/// Worker count: hardware concurrency capped by SPECTRAL_FLOW_THREADS.
unsigned worker_count();

/// Runs fn(i) for i in [0, n) across worker threads. fn must not touch
/// shared mutable state other than its own slot i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace spectralflow
