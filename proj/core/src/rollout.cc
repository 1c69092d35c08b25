#include "nonnormal/rollout.h"

#include <algorithm>
#include <cmath>
#include <optional>

#include "nonnormal/errors.h"
#include "nonnormal/parallel.h"

namespace nonnormal {

namespace {

struct RolloutSample {
  bool diverged = false;
  double cov_trace = 0.0;
  double j_peak = 0.0;
  double applied_variance = 0.0;
  double applied_jitter = 0.0;
  Eigen::RowVectorXd applied_mean;
  Eigen::RowVectorXd diff_mean;
  double rms_full = 0.0;
  std::vector<double> rms_selected;
  double control_rms = 0.0;
  // Kept only when a trajectory sink is installed.
  Matrix states;
  Signal raw;
  Signal applied;
};

Vector initial_state(const RolloutConfig& config, Eigen::Index n, std::size_t rollout) {
  switch (config.initial.kind) {
    case InitialStateKind::kZero:
      return Vector::Zero(n);
    case InitialStateKind::kFixed:
      return config.initial.fixed;
    case InitialStateKind::kGaussian: {
      RandomStream stream = RandomStream::derive(
          config.base_seed, config.stream_tag + "/init", config.stream_seed, rollout);
      Eigen::SelfAdjointEigenSolver<Matrix> eig(config.initial.covariance);
      const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
      Vector z(n);
      for (Eigen::Index i = 0; i < n; ++i) z(i) = stream.gaussian();
      return eig.eigenvectors() * root.asDiagonal() * z;
    }
  }
  return Vector::Zero(n);
}

// `trajectory` holds x_0..x_T; statistics use x_1..x_T.
void summarize(const Matrix& trajectory, const Signal& applied, const Vector& nominal,
               const std::vector<std::size_t>& selected, RolloutSample& out) {
  const Eigen::Index steps = trajectory.rows() - 1;
  const double t = static_cast<double>(steps);
  const auto states = trajectory.bottomRows(steps);
  const Eigen::RowVectorXd mean = states.colwise().mean();
  out.cov_trace = (states.rowwise() - mean).array().square().sum() / t;
  out.j_peak = states.rowwise().norm().maxCoeff();
  out.rms_full = std::sqrt(states.array().square().sum() / t);
  out.rms_selected.resize(selected.size());
  for (std::size_t i = 0; i < selected.size(); ++i) {
    const auto col = static_cast<Eigen::Index>(selected[i]);
    out.rms_selected[i] = std::sqrt(states.col(col).array().square().sum() / t);
  }
  const SignalStats stats = signal_stats(applied);
  out.applied_variance = stats.total_variance;
  out.applied_jitter = stats.step_diff_variance.value_or(0.0);
  out.applied_mean = applied.colwise().mean();
  if (applied.rows() > 1) {
    const Eigen::Index k = applied.rows() - 1;
    out.diff_mean = (applied.bottomRows(k) - applied.topRows(k)).colwise().mean();
  } else {
    out.diff_mean = Eigen::RowVectorXd::Zero(applied.cols());
  }
  if (nominal.size() == 0) {
    out.control_rms = std::sqrt(applied.array().square().sum() / t);
  } else {
    out.control_rms =
        std::sqrt((applied.rowwise() - nominal.transpose()).array().square().sum() / t);
  }
}

RolloutMetrics reduce(std::vector<RolloutSample>& samples, const RolloutConfig& config) {
  RolloutMetrics m;
  m.state_rms_selected.assign(config.selected_states.size(), 0.0);
  for (const RolloutSample& s : samples) {
    if (s.diverged) {
      ++m.diverged_count;
      continue;
    }
    ++m.accepted_count;
    m.per_rollout.cov_trace.push_back(s.cov_trace);
    m.per_rollout.j_peak.push_back(s.j_peak);
    m.per_rollout.applied_input_variance.push_back(s.applied_variance);
    m.cov_trace += s.cov_trace;
    m.j_peak += s.j_peak;
    m.applied_input_variance += s.applied_variance;
    m.applied_input_jitter += s.applied_jitter;
    m.state_rms_full += s.rms_full;
    m.control_rms += s.control_rms;
    for (std::size_t i = 0; i < s.rms_selected.size(); ++i) {
      m.state_rms_selected[i] += s.rms_selected[i];
    }
  }
  if (m.accepted_count > 0) {
    const double n = static_cast<double>(m.accepted_count);
    m.cov_trace /= n;
    m.j_peak /= n;
    m.applied_input_variance /= n;
    m.applied_input_jitter /= n;
    m.state_rms_full /= n;
    m.control_rms /= n;
    for (double& v : m.state_rms_selected) v /= n;
    // Pool the applied-input samples of all accepted rollouts: the within-
    // rollout part above plus the spread of the rollout means.
    Eigen::RowVectorXd grand_mean, grand_diff;
    for (const RolloutSample& s : samples) {
      if (s.diverged) continue;
      if (grand_mean.size() == 0) {
        grand_mean = s.applied_mean;
        grand_diff = s.diff_mean;
      } else {
        grand_mean += s.applied_mean;
        grand_diff += s.diff_mean;
      }
    }
    grand_mean /= n;
    grand_diff /= n;
    double between = 0.0, between_diff = 0.0;
    for (const RolloutSample& s : samples) {
      if (s.diverged) continue;
      between += (s.applied_mean - grand_mean).squaredNorm();
      between_diff += (s.diff_mean - grand_diff).squaredNorm();
    }
    m.applied_input_variance += between / n;
    m.applied_input_jitter += between_diff / n;
  } else {
    const double nan = std::nan("");
    m.cov_trace = m.j_peak = m.applied_input_variance = m.applied_input_jitter = nan;
    m.state_rms_full = m.control_rms = nan;
    for (double& v : m.state_rms_selected) v = nan;
  }
  if (config.sink) {
    for (std::size_t r = 0; r < samples.size(); ++r) {
      if (samples[r].diverged) continue;
      config.sink(r, samples[r].states, samples[r].raw, samples[r].applied);
    }
  }
  return m;
}

void check_selected(const RolloutConfig& config, Eigen::Index n) {
  for (const std::size_t idx : config.selected_states) {
    if (static_cast<Eigen::Index>(idx) >= n) {
      throw ShapeError("selected state index " + std::to_string(idx) +
                       " out of range for state dimension " + std::to_string(n));
    }
  }
  if (config.initial.kind == InitialStateKind::kFixed && config.initial.fixed.size() != n) {
    throw ShapeError("fixed initial state has wrong dimension");
  }
  if (config.initial.kind == InitialStateKind::kGaussian &&
      (config.initial.covariance.rows() != n || config.initial.covariance.cols() != n)) {
    throw ShapeError("initial covariance has wrong dimension");
  }
}

}  // namespace

void RolloutConfig::validate() const {
  if (horizon == 0) throw EmptyHorizon("rollout horizon must be >= 1");
  if (n_rollouts == 0) throw InvalidArgument("need at least one rollout");
}

RolloutMetrics simulate_linear(const LinearClosedLoop& system, const NoiseSpec& noise,
                               const SuppressorConfig& suppressor,
                               const RolloutConfig& config) {
  config.validate();
  noise.validate();
  suppressor.validate();
  const Eigen::Index n = system.state_dim();
  if (static_cast<Eigen::Index>(noise.channels) != system.input_dim()) {
    throw ShapeError("noise has " + std::to_string(noise.channels) +
                     " channels but G has " + std::to_string(system.input_dim()) +
                     " columns");
  }
  check_selected(config, n);
  const auto horizon = static_cast<Eigen::Index>(config.horizon);
  const Matrix& a = system.a();
  const Matrix& g = system.g();

  std::vector<RolloutSample> samples(config.n_rollouts);
  parallel_for(config.n_rollouts, config.threads, [&](std::size_t r) {
    RandomStream stream =
        RandomStream::derive(config.base_seed, config.stream_tag, config.stream_seed, r);
    Signal raw = sample_noise(noise, config.horizon, stream);
    Signal applied = apply_suppressor(raw, suppressor);
    Matrix trajectory(horizon + 1, n);
    Vector x = initial_state(config, n, r);
    trajectory.row(0) = x.transpose();
    for (Eigen::Index t = 0; t < horizon; ++t) {
      x = a * x + g * applied.row(t).transpose();
      trajectory.row(t + 1) = x.transpose();
    }
    RolloutSample& s = samples[r];
    summarize(trajectory, applied, Vector(), config.selected_states, s);
    if (config.sink) {
      s.states = std::move(trajectory);
      s.raw = std::move(raw);
      s.applied = std::move(applied);
    }
  });
  return reduce(samples, config);
}

RolloutMetrics simulate_generic(const GenericLoop& loop, const NoiseSpec& noise,
                                const SuppressorConfig& suppressor,
                                const RolloutConfig& config) {
  config.validate();
  noise.validate();
  suppressor.validate();
  if (!loop.step || !loop.controller) {
    throw InvalidArgument("generic loop needs both a step and a controller");
  }
  const Eigen::Index n = loop.state_dim;
  if (n <= 0) throw ShapeError("generic loop state dimension must be positive");
  check_selected(config, n);
  const auto horizon = static_cast<Eigen::Index>(config.horizon);
  const auto m = static_cast<Eigen::Index>(noise.channels);
  if (loop.nominal_input.size() != 0 && loop.nominal_input.size() != m) {
    throw ShapeError("nominal input has wrong dimension");
  }

  std::vector<RolloutSample> samples(config.n_rollouts);
  parallel_for(config.n_rollouts, config.threads, [&](std::size_t r) {
    RandomStream stream =
        RandomStream::derive(config.base_seed, config.stream_tag, config.stream_seed, r);
    const Signal eta = sample_noise(noise, config.horizon, stream);
    InputSuppressor smoother(suppressor);
    Signal raw(horizon, m);
    Signal applied(horizon, m);
    Matrix trajectory(horizon + 1, n);
    Vector x = initial_state(config, n, r);
    trajectory.row(0) = x.transpose();
    RolloutSample& s = samples[r];
    for (Eigen::Index t = 0; t < horizon; ++t) {
      const Vector policy = loop.controller(x);
      if (policy.size() != m) throw ShapeError("controller output has wrong dimension");
      raw.row(t) = (policy + eta.row(t).transpose()).transpose();
      const Vector u = smoother.step(raw.row(t).transpose());
      applied.row(t) = u.transpose();
      x = loop.step(x, u);
      if (x.size() != n) throw ShapeError("step returned wrong state dimension");
      if (!x.allFinite() || (loop.admissible && !loop.admissible(x))) {
        s.diverged = true;
        return;
      }
      trajectory.row(t + 1) = x.transpose();
    }
    summarize(trajectory, applied, loop.nominal_input, config.selected_states, s);
    if (config.sink) {
      s.states = std::move(trajectory);
      s.raw = std::move(raw);
      s.applied = std::move(applied);
    }
  });
  return reduce(samples, config);
}

}  // namespace nonnormal
