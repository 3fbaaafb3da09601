#include "asymlag/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace asymlag {

namespace {
constexpr Eigen::Index kMinChunk = 128;
}

int thread_count() {
  if (const char* env = std::getenv("ASYMLAG_THREADS")) {
    const int requested = std::atoi(env);
    if (requested > 0) return requested;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(Eigen::Index n, const std::function<void(Eigen::Index)>& body) {
  const Eigen::Index workers =
      std::min<Eigen::Index>(thread_count(), (n + kMinChunk - 1) / kMinChunk);
  if (workers <= 1) {
    for (Eigen::Index i = 0; i < n; ++i) body(i);
    return;
  }
  const Eigen::Index chunk = (n + workers - 1) / workers;
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (Eigen::Index w = 0; w < workers; ++w) {
    const Eigen::Index lo = w * chunk;
    const Eigen::Index hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (Eigen::Index i = lo; i < hi; ++i) body(i);
    });
  }
}

}  // namespace asymlag
