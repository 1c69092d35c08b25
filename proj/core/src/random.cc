#include "nonnormal/random.h"

#include <cmath>
#include <numbers>

namespace nonnormal {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}
}  // namespace

std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RandomStream RandomStream::derive(std::uint64_t base_seed,
                                  std::string_view experiment,
                                  std::uint64_t seed,
                                  std::uint64_t index) noexcept {
  std::uint64_t key = splitmix64_mix(base_seed + kGolden);
  key = splitmix64_mix(key ^ fnv1a(experiment));
  key = splitmix64_mix(key + kGolden * (seed + 1));
  key = splitmix64_mix(key ^ (0xD1B54A32D192ED03ULL * (index + 1)));
  return RandomStream(key);
}

std::uint64_t RandomStream::next_u64() noexcept {
  state_ += kGolden;
  return splitmix64_mix(state_);
}

double RandomStream::uniform() noexcept {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double RandomStream::gaussian() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double radius = std::sqrt(-2.0 * std::log(uniform()));
  const double angle = 2.0 * std::numbers::pi * (uniform() - 0.5);
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t RandomStream::uniform_index(std::uint64_t n) noexcept {
  // Lemire's multiply-shift with rejection of the biased low range.
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const unsigned __int128 m =
        static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(n);
    if (static_cast<std::uint64_t>(m) >= threshold) {
      return static_cast<std::uint64_t>(m >> 64);
    }
  }
}

}  // namespace nonnormal
