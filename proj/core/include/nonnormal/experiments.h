#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nonnormal/moments.h"
#include "nonnormal/quadrotor.h"
#include "nonnormal/rollout.h"
#include "nonnormal/signals.h"
#include "nonnormal/stats.h"
#include "nonnormal/systems.h"

namespace nonnormal {

/// (white − filtered) / white × 100; 0 when the two values are equal.
double reduction_pct(double white, double filtered);

/// Receives accepted trajectories tagged with the run they belong to,
/// e.g. "filtered" or "nominal_hover/0.2/seed1/white".
using LabeledTrajectorySink =
    std::function<void(const std::string& label, std::size_t rollout, const Matrix& states,
                       const Signal& raw, const Signal& applied)>;

// ---------------------------------------------------------------- CI-1

struct CI1Config {
  ShearFamilySpec family = ShearFamilySpec::defaults();
  /// White source driving the empirical rollouts; must match the family W.
  NoiseSpec noise;
  RolloutConfig rollout;
  BootstrapConfig bootstrap;
  std::uint64_t bootstrap_seed = 0;

  CI1Config();
};

struct CI1Row {
  double alpha = 0.0;
  double kappa_v = 1.0;
  double log_kappa_v = 0.0;
  double g_peak = 1.0;
  double rho = 0.0;
  /// tr of the stationary covariance Σ = AΣAᵀ + G W Gᵀ.
  double cov_trace_analytic = 0.0;
  /// Mean per-rollout tr(Σ̂_x).
  double cov_trace_empirical = 0.0;
  /// Exact expectation of the empirical estimator at the run's horizon.
  double cov_trace_expected = 0.0;
};

struct CI1Result {
  std::vector<CI1Row> rows;
  double corr_kappa_cov = 0.0;
  double corr_kappa_gpeak = 0.0;
  Interval ci_cov;
  Interval ci_gpeak;
  double corr_log_kappa_cov = 0.0;
  double corr_log_kappa_gpeak = 0.0;
  double corr_kappa_cov_empirical = 0.0;
  double rho_drift = 0.0;
  VerificationReport controls;
};

/// Throws AmplifierControlViolated if the members do not hold Λ, ρ, G, W
/// fixed; DegenerateGrid if κ(V) does not vary.
CI1Result run_ci1(const std::vector<FamilyMember>& members, const CI1Config& config);
CI1Result run_ci1(const CI1Config& config);

// ---------------------------------------------------------------- CI-2

struct CI2Config {
  /// Shear strength of the family member held fixed.
  double alpha = 10.0;
  RolloutConfig rollout;
  NoiseSpec white;
  NoiseSpec filtered;
  /// Smoother in the filtered arm; the white arm is applied unsmoothed.
  SuppressorConfig suppressor;
  LabeledTrajectorySink sink;

  CI2Config();
};

struct CI2Arm {
  RolloutMetrics metrics;
  double cov_trace_analytic = 0.0;
  double cov_trace_expected = 0.0;
  double applied_variance_analytic = 0.0;
};

struct CI2Reductions {
  double action_variance_pct = 0.0;
  double cov_trace_pct = 0.0;
  double j_peak_pct = 0.0;
};

struct CI2Result {
  double alpha = 0.0;
  double rho = 0.0;
  double kappa_v = 1.0;
  CI2Arm white;
  CI2Arm filtered;
  double g_peak_white = 1.0;
  double g_peak_filtered = 1.0;
  CI2Reductions reductions;
};

/// Both arms must be given bitwise-identical systems, otherwise
/// AmplifierControlViolated. Structural diagnostics are computed once.
CI2Result run_ci2_arms(const LinearClosedLoop& white_system,
                       const LinearClosedLoop& filtered_system, const CI2Config& config);
CI2Result run_ci2(const FamilyMember& member, const CI2Config& config);

// ---------------------------------------------------------------- CI-3

struct CI3Config {
  std::vector<quadrotor::Scenario> scenarios = quadrotor::default_scenarios();
  std::vector<double> levels{0.0, 0.05, 0.10, 0.20};
  std::vector<std::uint64_t> seeds{0, 1, 2};
  quadrotor::BridgeConfig bridge;
  SuppressorConfig suppressor;
  LabeledTrajectorySink sink;
};

struct CI3MetricRow {
  std::string scenario;
  std::uint64_t seed = 0;
  double level = 0.0;
  quadrotor::Arm arm = quadrotor::Arm::kWhite;
  double action_variance = 0.0;
  double cov_trace = 0.0;
  double j_peak = 0.0;
  double state_rms_x = 0.0;
  double state_rms_z = 0.0;
  double state_rms_theta = 0.0;
  double state_rms_full = 0.0;
  double control_rms = 0.0;
  std::size_t diverged_count = 0;
};

struct CI3Reduction {
  std::string scenario;
  std::uint64_t seed = 0;
  double level = 0.0;
  double action_variance_pct = 0.0;
  double cov_trace_pct = 0.0;
  double j_peak_pct = 0.0;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

struct CI3LevelAggregate {
  double level = 0.0;
  MeanStd action_variance_pct;
  MeanStd cov_trace_pct;
};

struct CI3StressRow {
  std::string scenario;  // short label, "Agg" for the aggregate row
  double g_peak = 1.0;
  MeanStd action_variance_pct;
  MeanStd cov_trace_pct;
};

struct CI3Diagnostic {
  std::string scenario;
  double rho = 0.0;
  double kappa_v = 1.0;
  PeakGainResult g_peak;
  std::size_t riccati_iterations = 0;
};

struct CI3Summary {
  std::vector<CI3Reduction> reductions;
  std::vector<CI3LevelAggregate> by_level;
  /// Per-scenario rows at the largest level followed by the aggregate row.
  std::vector<CI3StressRow> stress;
};

struct CI3Result {
  std::vector<CI3Diagnostic> diagnostics;
  std::vector<CI3MetricRow> rows;
  CI3Summary summary;
};

/// Pure function of the metric rows plus per-scenario peak gains (in
/// scenario order). Scenario-mean first, then mean ± sample std over seeds.
CI3Summary summarize_ci3(const std::vector<CI3MetricRow>& rows,
                         const std::vector<std::pair<std::string, double>>& g_peaks);

CI3Result run_ci3(const CI3Config& config);

}  // namespace nonnormal
