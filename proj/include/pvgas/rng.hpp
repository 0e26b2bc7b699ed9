#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include "pvgas/common.hpp"

namespace pvgas {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The 64-bit key is the master seed; the 128-bit counter holds the stream id in
/// its upper half and the block index in its lower half, so every
/// (seed, stream id) pair addresses a disjoint sequence of 2^64 blocks.
class Rng {
 public:
  using result_type = std::uint64_t;

  static constexpr const char* kAlgorithm = "philox4x32-10";

  Rng(std::uint64_t master_seed, std::uint64_t stream_id)
      : key_{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32)},
        stream_{static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32)} {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform index in [0, n).
  std::uint64_t below(std::uint64_t n);

  double normal();

  /// Uniform point in the unit-area disk.
  Vec2 disk_point();

  std::uint64_t blocks_used() const { return block_; }

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 2> stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> out_{};
  int cursor_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Generator for stream `stream_id` of `master_seed`.
inline Rng rng_stream(std::uint64_t master_seed, std::uint64_t stream_id) {
  return Rng(master_seed, stream_id);
}

/// Deterministic stream-id composition for nested experiment indices.
constexpr std::uint64_t stream_id(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a * 0x9E3779B97F4A7C15ull + b + 0x632BE59BD9B4E019ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace pvgas
