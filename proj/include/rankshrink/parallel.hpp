#pragma once

#include <cstddef>
#include <functional>

namespace rankshrink {

/// Worker count used by parallel_for. Defaults to RANKSHRINK_THREADS if set,
/// else std::thread::hardware_concurrency().
std::size_t thread_count();

/// Overrides the worker count for the rest of the process (0 restores the
/// default). Intended for tests and the CLI.
void set_thread_count(std::size_t n);

/// Runs body(i) for i in [0, n). Jobs are claimed dynamically, so callers
/// must write results to per-index slots and combine them in index order.
/// Calls made from inside a running body execute serially on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace rankshrink
