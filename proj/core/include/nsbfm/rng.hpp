#pragma once

#include <array>
#include <cstdint>

namespace nsbfm {

/// Philox4x32-10 counter-based generator.
///
/// A stream is identified by (seed, replication, stream id); draws within a
/// stream are indexed by a 64-bit counter. Two streams never share state, so
/// replications and per-unit draws can be generated in any order or thread
/// and still reproduce bit-for-bit.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint32_t replication, std::uint32_t stream) noexcept;

  std::uint64_t next_u64() noexcept;

  /// Uniform on (0, 1), 53 bits.
  double uniform() noexcept;

  /// Standard normal by Box-Muller; the second variate of each pair is cached.
  double normal() noexcept;

  /// Raw Philox block for counter words (c0..c3) under key (k0, k1).
  static std::array<std::uint32_t, 4> philox(std::array<std::uint32_t, 4> counter,
                                             std::array<std::uint32_t, 2> key) noexcept;

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_;
  std::uint32_t replication_;
  std::uint32_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace nsbfm
