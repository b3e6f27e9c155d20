#pragma once

#include <cstddef>
#include <functional>

namespace rlfit {

/// Runs fn(0..n-1) across at most `jobs` worker threads. Work items are
/// handed out through an atomic counter; callers must write results only to
/// their own index. Exceptions are collected and the lowest-index one is
/// rethrown after all workers join.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

}  // namespace rlfit
