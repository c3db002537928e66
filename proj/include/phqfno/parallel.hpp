#pragma once

#include <cstddef>
#include <functional>

namespace phqfno {

/// Execution policy for the data-parallel batch loops (per-sample gradient
/// evaluation, trajectory generation, noise-sweep cells). threads == 1 runs
/// the serial reference path; threads == 0 uses all available OpenMP threads.
///
/// Loop bodies must write only to per-index slots, so results are identical
/// to the serial path regardless of thread count.
struct ExecPolicy {
  int threads = 0;

  static ExecPolicy serial() { return ExecPolicy{1}; }
  static ExecPolicy max_parallel() { return ExecPolicy{0}; }

  bool is_serial() const;
  int resolved_threads() const;
};

void parallel_for(std::size_t n, const ExecPolicy& policy,
                  const std::function<void(std::size_t)>& body);

}  // namespace phqfno
