#pragma once

#include <cstddef>
#include <functional>

namespace diolab {

// DIOLAB_THREADS if set, else hardware concurrency
int default_threads();
void set_default_threads(int threads);
int resolve_threads(int requested);

// Runs fn(i) for every i in [0, count). Work items are claimed dynamically;
// callers write into slot i so reductions stay in index order.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace diolab
