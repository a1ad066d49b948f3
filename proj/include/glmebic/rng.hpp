#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace glmebic {

/// Philox4x32-10 counter-based generator. The key is the 64-bit seed, and the
/// upper half of the counter holds a stream id, so (seed, stream) pairs give
/// independent sequences that can be generated on any thread. Satisfies
/// UniformRandomBitGenerator with 64-bit output.
class Philox {
 public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Ten rounds of the bijection on one counter block.
  static Block encrypt(Block counter, Key key) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Block out_{};
  int used_ = 4;
};

/// Uniform double in the open interval (0, 1).
double uniform_open(Philox& rng) noexcept;

}  // namespace glmebic
