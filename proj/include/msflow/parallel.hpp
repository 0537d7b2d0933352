#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <vector>

namespace msflow {

enum class Execution { Serial, Parallel };

/// Caps the number of OpenMP workers used by Execution::Parallel (0 = runtime default).
void set_max_workers(int workers);
int max_workers();

namespace detail {
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);
}

/// out[i] = fn(i) for i < count. Results are placed by index, so the output does
/// not depend on scheduling. The first exception (lowest index) is rethrown.
template <class Fn>
auto map_indexed(std::size_t count, Fn&& fn, Execution exec = Execution::Parallel)
    -> std::vector<decltype(fn(std::size_t{}))> {
  using T = decltype(fn(std::size_t{}));
  std::vector<T> out(count);
  if (exec == Execution::Serial || count < 2) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(count);
  detail::parallel_for(count, [&](std::size_t i) {
    try {
      out[i] = fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace msflow
