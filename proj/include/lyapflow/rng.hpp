#pragma once

#include <array>
#include <cstdint>

#include "lyapflow/types.hpp"

namespace lyapflow {

/// Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Substream purposes. Each (seed, path, purpose) triple maps to an
/// independent counter range, so draws never depend on scheduling.
enum class Stream : std::uint32_t
{
  initial_state = 0,
  noise = 1,
  frame = 2,
  target_sample = 3,
  field = 4,
  auxiliary = 5
};

/// Counter-based generator: key = seed, counter = (block index, stream id).
class CounterRng
{
public:
  CounterRng(std::uint64_t seed, std::uint64_t stream_id);
  CounterRng(std::uint64_t seed, std::uint64_t path, Stream purpose);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal by Box-Muller; caches the second variate.
  double normal();
  Vec normal_vector(int dim);

private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

} // namespace lyapflow
