#include "lyapflow/executor.hpp"

#include <atomic>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

namespace lyapflow {

Executor::Executor(unsigned workers)
  : workers_(workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : workers)
{
}

void Executor::for_each(std::size_t n, const std::function<void(std::size_t, unsigned)>& body) const
{
  if (workers_ <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      body(i, 0);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::size_t error_index = std::numeric_limits<std::size_t>::max();
  std::exception_ptr error;

  auto run = [&](unsigned worker) {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n)
        return;
      try {
        body(i, worker);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };

  const unsigned count = static_cast<unsigned>(std::min<std::size_t>(workers_, n));
  {
    std::vector<std::jthread> pool;
    pool.reserve(count);
    for (unsigned w = 0; w < count; ++w)
      pool.emplace_back(run, w);
  }
  if (error)
    std::rethrow_exception(error);
}

} // namespace lyapflow
