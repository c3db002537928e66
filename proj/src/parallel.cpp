#include "phqfno/parallel.hpp"

#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace phqfno {

bool ExecPolicy::is_serial() const { return resolved_threads() <= 1; }

int ExecPolicy::resolved_threads() const {
#ifdef _OPENMP
  if (threads <= 0) return omp_get_max_threads();
  return threads;
#else
  return 1;
#endif
}

void parallel_for(std::size_t n, const ExecPolicy& policy,
                  const std::function<void(std::size_t)>& body) {
  if (policy.is_serial() || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
#ifdef _OPENMP
  std::exception_ptr first_error = nullptr;
#pragma omp parallel for schedule(dynamic) num_threads(policy.resolved_threads())
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
#else
  for (std::size_t i = 0; i < n; ++i) body(i);
#endif
}

}  // namespace phqfno
