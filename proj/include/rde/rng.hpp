#pragma once

#include <cmath>
#include <cstdint>

namespace rde {

// SplitMix64 finalizer. Bijective on 64-bit words; passes BigCrush as the
// output stage of a Weyl sequence.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z;
}

// Order-sensitive key derivation: derive_key(a,b) != derive_key(b,a).
constexpr std::uint64_t derive_key(std::uint64_t key, std::uint64_t word) noexcept {
  return mix64(mix64(key) + word * 0x9e3779b97f4a7c15ull);
}

constexpr std::uint64_t derive_key(std::uint64_t key, std::uint64_t a, std::uint64_t b) noexcept {
  return derive_key(derive_key(key, a), b);
}

// Stream tags fed to derive_key so that no two consumers of a master seed
// share a stream.
namespace stream {
inline constexpr std::uint64_t env_field = 0x01;
inline constexpr std::uint64_t sde_noise = 0x02;
inline constexpr std::uint64_t marks = 0x03;
inline constexpr std::uint64_t bridge_target = 0x04;
inline constexpr std::uint64_t bridge_noise = 0x05;
inline constexpr std::uint64_t replicate = 0x06;
inline constexpr std::uint64_t environment = 0x07;
inline constexpr std::uint64_t shuffle = 0x08;
inline constexpr std::uint64_t probe = 0x09;
inline constexpr std::uint64_t bridge_interval = 0x0a;
}  // namespace stream

// Keyed counter generator: value i of the stream is a pure function of
// (key, i), so any position can be read in O(1), replay is bit-exact, and
// concurrent readers need no state.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  std::uint64_t key() const noexcept { return key_; }

  std::uint64_t bits(std::uint64_t counter) const noexcept {
    return mix64(key_ + counter * 0x9e3779b97f4a7c15ull);
  }

  // [0, 1)
  double u01(std::uint64_t counter) const noexcept {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  // strictly inside (0, 1)
  double u01_open(std::uint64_t counter) const noexcept {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  // strictly inside (-1, 1)
  double sym(std::uint64_t counter) const noexcept {
    return 2.0 * u01_open(counter) - 1.0;
  }

  // Standard normal via Box-Muller; one value per counter, two sub-draws.
  double normal(std::uint64_t counter) const noexcept {
    const double u1 = u01_open(2 * counter);
    const double u2 = u01(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  std::uint64_t key_;
};

}  // namespace rde
