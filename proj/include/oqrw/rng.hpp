#pragma once

#include <cstdint>

namespace oqrw {

/// 64-bit avalanche finalizer (MurmurHash3 fmix64). Bit-exact contract:
/// per-trajectory seeds are mix64(seed ^ index).
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(seed ^ index);
}

/// Counter-based generator: the k-th draw is mix64(key + k * golden gamma).
/// A stream is a pure function of its key, so trajectories do not depend on
/// scheduling order.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  constexpr result_type operator()() noexcept {
    return mix64(key_ + (counter_++) * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t draws() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace oqrw
