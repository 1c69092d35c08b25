#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nonnormal/linalg.h"
#include "nonnormal/signals.h"
#include "nonnormal/systems.h"

namespace nonnormal {

enum class InitialStateKind { kZero, kFixed, kGaussian };

struct InitialState {
  InitialStateKind kind = InitialStateKind::kZero;
  /// Used for kFixed.
  Vector fixed;
  /// Used for kGaussian (zero mean).
  Matrix covariance;
};

/// Receives one rollout after the batch finishes, in rollout order.
/// `states` holds x_0..x_T (T+1 rows); `raw` and `applied` hold u_0..u_{T-1}.
using TrajectorySink = std::function<void(std::size_t rollout, const Matrix& states,
                                          const Signal& raw, const Signal& applied)>;

struct RolloutConfig {
  std::size_t horizon = 80;
  std::size_t n_rollouts = 512;
  std::uint64_t base_seed = 0;
  /// Stream key is (stream_tag, stream_seed, rollout index).
  std::string stream_tag = "rollout";
  std::uint64_t stream_seed = 0;
  InitialState initial;
  /// State indices reported in RolloutMetrics::state_rms_selected.
  std::vector<std::size_t> selected_states;
  /// 0 means one worker per hardware thread. Never affects results.
  std::size_t threads = 1;
  TrajectorySink sink;

  void validate() const;
};

struct PerRolloutValues {
  std::vector<double> cov_trace;
  std::vector<double> j_peak;
  /// Within-rollout variance; the pooled value adds the spread of means.
  std::vector<double> applied_input_variance;
};

/// Aggregates are means over accepted (non-diverged) rollouts. Statistics
/// are taken over states x_1..x_T and applied inputs u_0..u_{T-1}.
struct RolloutMetrics {
  /// Mean of tr(Σ̂_x), each rollout centred on its own time mean, 1/T.
  double cov_trace = 0.0;
  /// Mean of max_t ||x_t||_2.
  double j_peak = 0.0;
  /// Total population variance of the applied input pooled over all
  /// accepted rollouts and steps (N·T samples per channel).
  double applied_input_variance = 0.0;
  /// Pooled step-difference variance of the applied input (0 when T < 2).
  double applied_input_jitter = 0.0;
  double state_rms_full = 0.0;
  std::vector<double> state_rms_selected;
  /// RMS of the applied input about the nominal input.
  double control_rms = 0.0;
  std::size_t diverged_count = 0;
  std::size_t accepted_count = 0;
  PerRolloutValues per_rollout;
};

RolloutMetrics simulate_linear(const LinearClosedLoop& system, const NoiseSpec& noise,
                               const SuppressorConfig& suppressor,
                               const RolloutConfig& config);

/// Plant and controller for the generic engine. Both functions must be
/// deterministic and free of shared mutable state.
struct GenericLoop {
  std::function<Vector(const Vector& state, const Vector& input)> step;
  std::function<Vector(const Vector& state)> controller;
  /// Optional; a false return marks the rollout diverged. Non-finite
  /// states are always treated as diverged.
  std::function<bool(const Vector& state)> admissible;
  Eigen::Index state_dim = 0;
  /// Reference for control_rms; zero when empty.
  Vector nominal_input;
};

/// Per step: u_raw = controller(x) + η, u_app = smoother(u_raw),
/// x' = step(x, u_app). Diverged rollouts are counted and excluded.
RolloutMetrics simulate_generic(const GenericLoop& loop, const NoiseSpec& noise,
                                const SuppressorConfig& suppressor,
                                const RolloutConfig& config);

}  // namespace nonnormal
