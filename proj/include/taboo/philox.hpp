#pragma once

// Philox4x32-10 counter-based generator. Each (seed, trial) pair addresses
// its own substream, so Monte-Carlo aggregates are bit-identical no matter
// how trials are scheduled.

#include <array>
#include <cmath>
#include <cstdint>

namespace taboo {

namespace detail {

inline void philox_round(std::array<std::uint32_t, 4>& ctr, std::array<std::uint32_t, 2>& key) {
  constexpr std::uint64_t kMul0 = 0xD2511F53ULL;
  constexpr std::uint64_t kMul1 = 0xCD9E8D57ULL;
  const std::uint64_t product0 = kMul0 * ctr[0];
  const std::uint64_t product1 = kMul1 * ctr[2];
  const auto hi0 = static_cast<std::uint32_t>(product0 >> 32);
  const auto lo0 = static_cast<std::uint32_t>(product0);
  const auto hi1 = static_cast<std::uint32_t>(product1 >> 32);
  const auto lo1 = static_cast<std::uint32_t>(product1);
  ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  key[0] += 0x9E3779B9U;  // golden ratio
  key[1] += 0xBB67AE85U;  // sqrt(3) - 1
}

}  // namespace detail

/// One 10-round Philox4x32 block.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                               std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) detail::philox_round(counter, key);
  return counter;
}

/// Deterministic substream addressed by (seed, trial). Draws never depend
/// on other substreams, so trials can run in any order.
class TrialStream {
 public:
  TrialStream(std::uint64_t seed, std::uint64_t trial) : seed_(seed), trial_(trial) {}

  std::uint64_t next_u64() {
    if (pos_ == 2) {
      const auto block = philox4x32(
          {static_cast<std::uint32_t>(trial_), static_cast<std::uint32_t>(trial_ >> 32),
           static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32)},
          {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
      buffer_[0] = (static_cast<std::uint64_t>(block[1]) << 32) | block[0];
      buffer_[1] = (static_cast<std::uint64_t>(block[3]) << 32) | block[2];
      ++block_;
      pos_ = 0;
    }
    return buffer_[pos_++];
  }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe under the logarithm.
  double uniform_positive() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log(uniform_positive()) / rate; }

 private:
  std::uint64_t seed_;
  std::uint64_t trial_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int pos_ = 2;
};

}  // namespace taboo
