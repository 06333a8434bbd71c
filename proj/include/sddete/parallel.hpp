#pragma once

#include <cstddef>
#include <functional>

namespace sddete::parallel {

// Number of workers parallel_for may use. 0 is clamped to 1.
void set_worker_count(std::size_t n);
std::size_t worker_count();

// Runs body(i) for every i in [0, n), each exactly once, possibly on
// several threads. Calls made from inside a worker run inline, so nested
// use cannot deadlock. Every index is attempted even if some throw; after
// all have finished, the exception raised by the lowest index is rethrown.
// Results must therefore never depend on worker count or scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace sddete::parallel
