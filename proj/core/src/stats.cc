#include "nonnormal/stats.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "nonnormal/errors.h"

namespace nonnormal {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw InsufficientSamples("mean of an empty sample");
  double sum = 0.0;
  for (const double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double sample_stddev(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (const double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw ShapeError("pearson inputs have different lengths");
  }
  if (xs.size() < 2) throw InsufficientSamples("pearson needs at least 2 pairs");
  const double mx = mean(xs);
  const double my = mean(ys);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    throw DegenerateGrid("pearson input has zero variance");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double sorted_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InsufficientSamples("quantile of an empty sample");
  const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Interval bootstrap_pearson_ci(std::span<const double> xs, std::span<const double> ys,
                              const BootstrapConfig& config, RandomStream& stream) {
  if (xs.size() != ys.size()) throw ShapeError("bootstrap inputs have different lengths");
  if (xs.size() < 3) throw InsufficientSamples("bootstrap needs at least 3 pairs");
  if (config.n_resamples < 1000) {
    throw InvalidArgument("bootstrap needs at least 1000 resamples");
  }
  if (!(config.level > 0.0 && config.level < 1.0)) {
    throw InvalidArgument("bootstrap level must lie in (0, 1)");
  }
  const std::size_t n = xs.size();
  std::vector<double> rx(n), ry(n), stats;
  stats.reserve(config.n_resamples);
  for (std::size_t b = 0; b < config.n_resamples; ++b) {
    bool drawn = false;
    for (std::size_t attempt = 0; attempt <= config.max_redraws && !drawn; ++attempt) {
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = stream.uniform_index(n);
        rx[i] = xs[j];
        ry[i] = ys[j];
      }
      try {
        stats.push_back(pearson(rx, ry));
        drawn = true;
      } catch (const DegenerateGrid&) {
      }
    }
    if (!drawn) {
      throw DegenerateGrid("bootstrap resamples stayed degenerate after " +
                           std::to_string(config.max_redraws) + " redraws");
    }
  }
  std::sort(stats.begin(), stats.end());
  const double tail = 0.5 * (1.0 - config.level);
  return Interval{sorted_quantile(stats, tail), sorted_quantile(stats, 1.0 - tail)};
}

}  // namespace nonnormal
