#pragma once

#include <cstddef>
#include <functional>

namespace confcurv {

/// Worker count for grid sweeps: the last value passed to
/// set_thread_count, else CONFCURV_THREADS from the environment, else
/// std::thread::hardware_concurrency().
unsigned thread_count();
/// 0 restores the default.
void set_thread_count(unsigned n);

/// Calls body(i) for i in [0, count) on up to thread_count() threads.
/// Iterations must only write to their own slot of a preallocated result;
/// the first exception thrown (lowest index) is rethrown on the caller.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace confcurv
