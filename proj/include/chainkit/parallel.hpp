#pragma once

#include <cstddef>
#include <functional>

namespace chainkit {

/// Number of worker threads used by parallel scans. Defaults to the value of
/// CHAINKIT_THREADS when set, else the hardware concurrency.
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Runs body(i) for i in [0, n). Each index is handled exactly once; callers
/// write into per-index slots and reduce sequentially afterwards, so results
/// never depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace chainkit
