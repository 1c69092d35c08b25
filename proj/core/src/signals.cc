#include "nonnormal/signals.h"

#include <cmath>
#include <string>

#include "nonnormal/errors.h"

namespace nonnormal {

std::string_view to_string(NoiseKind kind) {
  return kind == NoiseKind::kWhite ? "white" : "ar1";
}

NoiseKind parse_noise_kind(std::string_view text) {
  if (text == "white") return NoiseKind::kWhite;
  if (text == "ar1") return NoiseKind::kAr1;
  throw InvalidArgument("unknown noise kind '" + std::string(text) +
                        "' (expected white or ar1)");
}

double NoiseSpec::channel_sigma(std::size_t c) const {
  return channel_scale.empty() ? sigma : sigma * channel_scale.at(c);
}

double NoiseSpec::stationary_variance(std::size_t c) const {
  const double s = channel_sigma(c);
  if (kind == NoiseKind::kWhite) return s * s;
  const double a = ar_coefficient;
  return s * s * (1.0 - a) / (1.0 + a);
}

void NoiseSpec::validate() const {
  if (!std::isfinite(sigma) || sigma < 0.0) {
    throw InvalidArgument("noise sigma must be finite and >= 0");
  }
  if (kind == NoiseKind::kAr1 &&
      (!std::isfinite(ar_coefficient) || ar_coefficient < 0.0 || ar_coefficient >= 1.0)) {
    throw InvalidArgument("ar1 coefficient must lie in [0, 1)");
  }
  if (channels == 0) throw InvalidArgument("noise needs at least one channel");
  if (!channel_scale.empty() && channel_scale.size() != channels) {
    throw ShapeError("channel_scale has " + std::to_string(channel_scale.size()) +
                     " entries for " + std::to_string(channels) + " channels");
  }
  for (const double s : channel_scale) {
    if (!std::isfinite(s) || s < 0.0) {
      throw InvalidArgument("channel scales must be finite and >= 0");
    }
  }
}

void SuppressorConfig::validate() const {
  if (!std::isfinite(beta) || !(beta > 0.0) || beta > 1.0) {
    throw InvalidBeta("beta must lie in (0, 1], got " + std::to_string(beta));
  }
}

InputSuppressor::InputSuppressor(SuppressorConfig config) : config_(config) {
  config_.validate();
}

Vector InputSuppressor::step(const Vector& raw) {
  if (config_.is_identity()) return raw;
  if (!primed_) {
    previous_ = raw;
    primed_ = true;
    return previous_;
  }
  previous_ = (1.0 - config_.beta) * previous_ + config_.beta * raw;
  return previous_;
}

double SignalStats::jitter() const {
  if (!step_diff_variance) {
    throw InsufficientSamples("step-difference variance needs at least 2 samples");
  }
  return *step_diff_variance;
}

Signal sample_noise(const NoiseSpec& spec, std::size_t horizon, RandomStream& stream) {
  spec.validate();
  if (horizon == 0) throw EmptyHorizon("noise horizon must be >= 1");
  const auto rows = static_cast<Eigen::Index>(horizon);
  const auto cols = static_cast<Eigen::Index>(spec.channels);
  Signal out(rows, cols);
  for (Eigen::Index t = 0; t < rows; ++t) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      out(t, c) = spec.channel_sigma(static_cast<std::size_t>(c)) * stream.gaussian();
    }
  }
  if (spec.sigma == 0.0) return Signal::Zero(rows, cols);
  if (spec.kind == NoiseKind::kAr1) {
    const double a = spec.ar_coefficient;
    out.row(0) *= std::sqrt((1.0 - a) / (1.0 + a));
    for (Eigen::Index t = 1; t < rows; ++t) {
      out.row(t) = a * out.row(t - 1) + (1.0 - a) * out.row(t);
    }
  }
  return out;
}

Signal apply_suppressor(const Signal& raw, const SuppressorConfig& config) {
  config.validate();
  if (raw.rows() == 0) throw EmptyHorizon("suppressor input is empty");
  if (config.is_identity()) return raw;
  Signal out(raw.rows(), raw.cols());
  out.row(0) = raw.row(0);
  const double keep = 1.0 - config.beta;
  for (Eigen::Index t = 1; t < raw.rows(); ++t) {
    out.row(t) = keep * out.row(t - 1) + config.beta * raw.row(t);
  }
  return out;
}

double ema_variance_ratio(double beta) {
  SuppressorConfig{beta, true}.validate();
  return beta / (2.0 - beta);
}

SignalStats signal_stats(const Signal& signal) {
  if (signal.rows() == 0) throw EmptyHorizon("signal is empty");
  SignalStats stats;
  const double n = static_cast<double>(signal.rows());
  const Vector mean = signal.colwise().mean().transpose();
  stats.per_channel_variance.resize(static_cast<std::size_t>(signal.cols()));
  for (Eigen::Index c = 0; c < signal.cols(); ++c) {
    const double v = (signal.col(c).array() - mean(c)).square().sum() / n;
    stats.per_channel_variance[static_cast<std::size_t>(c)] = v;
    stats.total_variance += v;
  }
  if (signal.rows() >= 2) {
    const Eigen::Index m = signal.rows() - 1;
    const Matrix diff = signal.bottomRows(m) - signal.topRows(m);
    const Eigen::RowVectorXd diff_mean = diff.colwise().mean();
    stats.step_diff_variance =
        (diff.rowwise() - diff_mean).array().square().sum() / static_cast<double>(m);
  }
  return stats;
}

}  // namespace nonnormal
