#pragma once

#include <cstddef>
#include <functional>

namespace lyapflow {

/// Parallel-map capability handed to the analysis modules. Work items are
/// indexed; callers write results into slots by index, so output never
/// depends on the number of workers.
class Executor
{
public:
  /// workers == 0 selects the hardware concurrency.
  explicit Executor(unsigned workers = 1);

  unsigned workers() const { return workers_; }

  /// Runs body(index, worker) for index in [0, n). The worker id is in
  /// [0, workers()) and may be used to select per-worker scratch state.
  /// If any item throws, the exception from the lowest index is rethrown.
  void for_each(std::size_t n, const std::function<void(std::size_t, unsigned)>& body) const;

private:
  unsigned workers_;
};

} // namespace lyapflow
