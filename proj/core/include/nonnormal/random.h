#pragma once

#include <cstdint>
#include <string_view>

namespace nonnormal {

/// SplitMix64 output finalizer; also used to mix stream keys.
std::uint64_t splitmix64_mix(std::uint64_t z) noexcept;

/// Value-semantic Gaussian stream: SplitMix64 state plus a Box–Muller spare.
/// Copying a stream forks it; two copies produce identical sequences.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) noexcept : state_(seed) {}

  /// Stream for one (experiment, seed, rollout) triple under a base seed.
  static RandomStream derive(std::uint64_t base_seed, std::string_view experiment,
                             std::uint64_t seed, std::uint64_t index) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on (0, 1].
  double uniform() noexcept;
  /// Standard normal via Box–Muller.
  double gaussian() noexcept;
  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) noexcept;

  friend bool operator==(const RandomStream&, const RandomStream&) = default;

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace nonnormal
