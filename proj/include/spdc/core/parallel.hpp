#pragma once

#include <cstddef>
#include <functional>

namespace spdc {

// Worker count used when a call does not pass one explicitly. Initialized from
// SPDC_WORKERS, falling back to std::thread::hardware_concurrency().
std::size_t default_workers();
void set_default_workers(std::size_t n);

// Runs body(i) for i in [0, count) on up to `workers` threads. Work items are
// claimed dynamically, so body must write only to slots owned by i. The first
// exception thrown by any item is rethrown after all threads join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  std::size_t workers = 0);

}  // namespace spdc
