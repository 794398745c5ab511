#pragma once

#include <cstdint>

namespace ldc {

/// Stateless counter-based generator.
///
/// Every variate is a pure function of (seed, stream, counter, lane), so a
/// replicate's draws do not depend on how many other replicates ran before
/// it or on which thread ran them. `stream` is the replicate index,
/// `counter` the draw index inside that replicate and `lane` selects one of
/// several uniforms consumed by a single draw (Box-Muller needs two, a
/// mixture draw needs one more for the component).
class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_(mix(mix(seed ^ 0x6a09e667f3bcc909ULL) + stream * 0x9e3779b97f4a7c15ULL)) {}

  constexpr std::uint64_t bits(std::uint64_t counter, std::uint32_t lane = 0) const noexcept {
    std::uint64_t x = key_ ^ mix(counter * 0xd1b54a32d192ed03ULL + lane);
    x = mix(x + 0x9e3779b97f4a7c15ULL);
    return mix(x ^ (static_cast<std::uint64_t>(lane) << 32 | lane));
  }

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  constexpr double uniform(std::uint64_t counter, std::uint32_t lane = 0) const noexcept {
    return (static_cast<double>(bits(counter, lane) >> 11) + 0.5) * 0x1.0p-53;
  }

  constexpr std::uint64_t key() const noexcept { return key_; }

 private:
  // splitmix64 finalizer
  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
};

}  // namespace ldc
