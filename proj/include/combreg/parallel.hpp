#pragma once

#include <cstddef>
#include <exception>

namespace combreg {

/// Runs body(i) for i in [0, count). Iterations may run concurrently; each
/// body must write only to its own output slot. If any iteration throws, the
/// exception from the lowest such index is rethrown after the loop.
template <typename Body>
void parallel_for(std::size_t count, Body&& body) {
  std::exception_ptr error;
  std::size_t error_index = count;
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic)
#endif
  for (long long i = 0; i < static_cast<long long>(count); ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#if defined(_OPENMP)
#pragma omp critical(combreg_parallel_error)
#endif
      {
        if (static_cast<std::size_t>(i) < error_index) {
          error_index = static_cast<std::size_t>(i);
          error = std::current_exception();
        }
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace combreg
