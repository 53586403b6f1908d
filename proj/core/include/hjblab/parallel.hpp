#pragma once

#include <cstddef>
#include <functional>

namespace hjb {

/// Worker count used by parallel_for. Defaults to HJB_THREADS when set,
/// otherwise to the hardware concurrency.
std::size_t worker_count();
void set_worker_count(std::size_t n);

/// Runs body(i) for i in [0, count) over contiguous chunks. The body must
/// only write to slots owned by i; callers reduce afterwards in index order
/// so results do not depend on the worker count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace hjb
