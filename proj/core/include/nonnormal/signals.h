#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "nonnormal/linalg.h"
#include "nonnormal/random.h"

namespace nonnormal {

/// Signals are stored one time step per row, one channel per column.
using Signal = Matrix;

enum class NoiseKind { kWhite, kAr1 };

std::string_view to_string(NoiseKind kind);
NoiseKind parse_noise_kind(std::string_view text);

/// Source disturbance. For channel c the white generator has standard
/// deviation sigma * channel_scale[c]; ar1 shapes it as
///   w_t = a w_{t-1} + (1 - a) ε_t
/// started from its stationary law. sigma = 0 disables the source.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::kWhite;
  double sigma = 0.2;
  double ar_coefficient = 0.0;
  std::size_t channels = 1;
  /// Empty means every channel has scale 1.
  std::vector<double> channel_scale;

  double channel_sigma(std::size_t c) const;
  /// Stationary per-channel variance of the generated sequence.
  double stationary_variance(std::size_t c) const;
  void validate() const;
};

/// First-order causal smoother u_app_t = (1 − β) u_app_{t−1} + β u_raw_t,
/// u_app_0 = u_raw_0. Disabled or β = 1 passes the input through.
struct SuppressorConfig {
  double beta = 0.85;
  bool enabled = true;

  bool is_identity() const noexcept { return !enabled || beta == 1.0; }
  void validate() const;
};

/// Streaming form of the smoother, one step at a time.
class InputSuppressor {
 public:
  explicit InputSuppressor(SuppressorConfig config);

  void reset() noexcept { primed_ = false; }
  Vector step(const Vector& raw);

 private:
  SuppressorConfig config_;
  bool primed_ = false;
  Vector previous_;
};

struct SignalStats {
  std::vector<double> per_channel_variance;
  double total_variance = 0.0;
  /// Total variance of u_t − u_{t−1}; absent for signals shorter than 2.
  std::optional<double> step_diff_variance;

  /// Throws InsufficientSamples when the step-difference variance is absent.
  double jitter() const;
};

Signal sample_noise(const NoiseSpec& spec, std::size_t horizon, RandomStream& stream);

Signal apply_suppressor(const Signal& raw, const SuppressorConfig& config);

/// β/(2 − β): stationary output/input variance ratio of the smoother under
/// white input.
double ema_variance_ratio(double beta);

/// Population (divide by N) variances about the sample mean.
SignalStats signal_stats(const Signal& signal);

}  // namespace nonnormal
