#pragma once

#include <cstddef>
#include <functional>

namespace spod {

/// Runs body(i) for i in [0, count) on up to `threads` worker threads.
/// Callers that reduce results must do so in index order after this returns;
/// the assignment of indices to threads is not deterministic. If bodies
/// throw, the exception of the lowest failing index is rethrown.
void parallel_for(std::ptrdiff_t count, int threads, const std::function<void(std::ptrdiff_t)>& body);

}  // namespace spod
