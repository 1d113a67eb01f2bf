#pragma once

#include <cstddef>
#include <functional>

namespace m2e {

/// Name of the environment variable that caps worker threads.
inline constexpr const char* kThreadsEnvVar = "M2E_NUM_THREADS";

/// Worker cap: M2E_NUM_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t max_parallelism();

/// Runs body(0) ... body(count - 1), possibly concurrently. Nested calls run
/// serially on the calling thread. If any call throws, the exception from
/// the lowest index is rethrown after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace m2e
