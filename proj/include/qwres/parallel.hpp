#pragma once

#include <cstddef>
#include <functional>

namespace qwres {

/// Caps worker threads; 0 restores the default (QWRES_THREADS, then the
/// hardware concurrency).
void set_thread_limit(int n);
int thread_limit();

/// Runs body(i) for i in [0, n) on up to thread_limit() threads. The first
/// exception by index is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace qwres
