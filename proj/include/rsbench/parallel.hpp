#pragma once

#include <cstddef>
#include <functional>

namespace rsbench {

/// Number of workers to use when the caller asks for `requested` (0 = all cores).
std::size_t resolve_jobs(std::size_t requested);

/// Runs body(i) for i in [0, count) on up to `jobs` threads. Work items must be
/// independent. If any item throws, the exception of the lowest failing index
/// is rethrown after all workers finish, so failures are deterministic.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& body);

}  // namespace rsbench
