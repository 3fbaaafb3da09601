#pragma once

#include <Eigen/Core>

#include <functional>

namespace asymlag {

/// Worker count: ASYMLAG_THREADS if set and positive, else hardware concurrency.
int thread_count();

/// Calls body(i) for i in [0, n). Each index is visited exactly once; the
/// split into chunks never changes what body(i) computes, so results are
/// identical to the sequential loop.
void parallel_for(Eigen::Index n, const std::function<void(Eigen::Index)>& body);

}  // namespace asymlag
