#include "msflow/parallel.hpp"

#include <atomic>

#include <omp.h>

namespace msflow {

namespace {
std::atomic<int> g_workers{0};
}

void set_max_workers(int workers) { g_workers.store(workers > 0 ? workers : 0); }

int max_workers() {
  const int w = g_workers.load();
  return w > 0 ? w : omp_get_max_threads();
}

namespace detail {

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const long n = static_cast<long>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(max_workers())
  for (long i = 0; i < n; ++i) body(static_cast<std::size_t>(i));
}

}  // namespace detail

}  // namespace msflow
