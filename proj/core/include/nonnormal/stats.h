#pragma once

#include <cstddef>
#include <span>

#include "nonnormal/random.h"

namespace nonnormal {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  double width() const noexcept { return hi - lo; }
};

double mean(std::span<const double> xs);
/// Sample standard deviation (n − 1); 0 for a single value.
double sample_stddev(std::span<const double> xs);

/// Sample Pearson correlation, clamped to [−1, 1].
/// Throws InsufficientSamples for n < 2, DegenerateGrid for zero variance.
double pearson(std::span<const double> xs, std::span<const double> ys);

/// Linear-interpolated quantile of an ascending-sorted sample.
double sorted_quantile(std::span<const double> sorted, double p);

struct BootstrapConfig {
  std::size_t n_resamples = 10'000;
  double level = 0.95;
  /// Redraws allowed for a resample whose x or y has zero variance.
  std::size_t max_redraws = 100;
};

/// Percentile bootstrap interval of the Pearson correlation, resampling
/// (x, y) pairs with replacement.
Interval bootstrap_pearson_ci(std::span<const double> xs, std::span<const double> ys,
                              const BootstrapConfig& config, RandomStream& stream);

}  // namespace nonnormal
