#pragma once

#include <array>
#include <cstdint>

namespace parafrac {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derives the seed of replica `index` from a master seed:
/// mix(master, i) = splitmix64(master ^ splitmix64(i + 1)).
constexpr std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(master ^ splitmix64(index + 1));
}

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Counter-based random stream.
///
/// A stream is addressed by (key, substream). Draw j of a stream is a pure
/// function of (key, substream, j), so any grid index or sample block can be
/// regenerated independently of all others and of the order of evaluation.
class Stream {
 public:
  Stream(std::uint64_t key, std::uint64_t substream) noexcept
      : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
        substream_(substream) {}

  /// Next raw 64-bit word.
  std::uint64_t next_u64() noexcept;

  /// Uniform double in the open interval (0, 1) with 53 random bits.
  double uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard exponential variate.
  double exponential() noexcept;

  /// Standard normal variate (Box-Muller; consumes exactly two uniforms per pair).
  double normal() noexcept;

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t substream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int available_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace parafrac
