#pragma once

#include <cstddef>

#include "nonnormal/linalg.h"
#include "nonnormal/signals.h"
#include "nonnormal/systems.h"

namespace nonnormal {

/// Source, smoother and plant stacked into one system driven by white noise:
///   s_t = [x_t; w_t; u_t],  s_{t+1} = F s_t + H ε_{t+1},  Cov(ε) = E
/// with w the shaped source, u the applied input and x the plant state.
/// White noise is the ar1 case a = 0; a disabled smoother is β = 1.
struct AugmentedLoop {
  Matrix transition;       // F
  Matrix input;            // H
  Matrix noise_cov;        // E
  Matrix initial_cov;      // Cov(s_0) for a zero plant state
  Eigen::Index state_dim = 0;
  Eigen::Index input_dim = 0;

  Eigen::Index source_offset() const noexcept { return state_dim; }
  Eigen::Index applied_offset() const noexcept { return state_dim + input_dim; }
};

AugmentedLoop augment(const LinearClosedLoop& system, const NoiseSpec& noise,
                      const SuppressorConfig& suppressor);

struct StationaryMoments {
  Matrix state_cov;
  Matrix applied_cov;
  double state_trace = 0.0;
  double applied_variance = 0.0;
};

/// Stationary covariances from the discrete Lyapunov equation of the
/// augmented loop. For white input with no smoothing the state block equals
/// solve_discrete_lyapunov(A, G W Gᵀ) with W the source covariance.
StationaryMoments stationary_moments(const LinearClosedLoop& system, const NoiseSpec& noise,
                                     const SuppressorConfig& suppressor);

struct FiniteHorizonMoments {
  /// E[tr Σ̂_x] for the per-rollout estimator over x_1..x_T.
  double cov_trace = 0.0;
  /// E of the applied-input population variance over u_0..u_{T-1}.
  double applied_variance = 0.0;
};

/// Exact expectations of the rollout estimators from a zero plant state,
/// accounting for the start-up transient and the time-mean subtraction.
FiniteHorizonMoments expected_rollout_moments(const LinearClosedLoop& system,
                                              const NoiseSpec& noise,
                                              const SuppressorConfig& suppressor,
                                              std::size_t horizon);

}  // namespace nonnormal
