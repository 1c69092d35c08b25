#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "nonnormal/linalg.h"
#include "nonnormal/rollout.h"
#include "nonnormal/signals.h"

namespace nonnormal::quadrotor {

using StateVector = Eigen::Matrix<double, 6, 1>;
using InputVector = Eigen::Vector2d;
using StateMatrix = Eigen::Matrix<double, 6, 6>;
using InputMatrix = Eigen::Matrix<double, 6, 2>;
using GainMatrix = Eigen::Matrix<double, 2, 6>;

struct Params {
  double mass = 1.0;       // kg
  double inertia = 0.01;   // kg m^2
  double gravity = 9.81;   // m/s^2
  double dt = 0.02;        // s

  void validate() const;
  double hover_thrust() const noexcept { return mass * gravity; }
  friend bool operator==(const Params&, const Params&) = default;
};

/// Planar rigid body: position (x, z), pitch θ and their rates.
struct State {
  double x = 0.0;
  double z = 0.0;
  double theta = 0.0;
  double vx = 0.0;
  double vz = 0.0;
  double omega = 0.0;

  StateVector vector() const noexcept;
  static State from_vector(const StateVector& v) noexcept;
};

struct Input {
  double thrust = 0.0;  // N
  double torque = 0.0;  // N m
};

/// ẍ = −(u1/m) sin θ, z̈ = (u1/m) cos θ − g, θ̈ = u2/I.
StateVector continuous_dynamics(const StateVector& s, const InputVector& u, const Params& p);

/// One classical RK4 step of length dt with the input held constant.
StateVector dynamics_step(const StateVector& s, const InputVector& u, const Params& p);
State dynamics_step(const State& s, const Input& u, const Params& p);

/// Exact Jacobians of dynamics_step at a hover equilibrium (θ = 0, zero
/// rates, u1 = m g). RK4 applied to the linearization gives the degree-4
/// Taylor polynomial of the matrix exponential.
struct DiscreteLinearization {
  StateMatrix a;
  InputMatrix b;
};
DiscreteLinearization hover_linearization(const Params& p);

struct LqrWeights {
  std::array<double, 6> state{20.0, 20.0, 2.0, 2.0, 2.0, 0.2};
  std::array<double, 2> input{0.05, 1.0};

  void validate() const;
};

/// u = hover_input − K s.
struct FeedbackGain {
  GainMatrix k = GainMatrix::Zero();
  InputVector hover_input = InputVector::Zero();
  std::size_t iterations = 0;
  double riccati_residual = 0.0;

  InputVector control(const StateVector& s) const { return hover_input - k * s; }
};

inline constexpr std::size_t kMaxRiccatiIterations = 10'000;
inline constexpr double kRiccatiTolerance = 1e-10;

/// Discrete LQR on the hover linearization by Riccati fixed-point iteration.
/// Throws ControllerDesignFailed on non-convergence or an unstable loop.
FeedbackGain design_controller(const Params& model, const LqrWeights& weights);

enum class ScenarioName { kNominalHover, kHeavyPayload, kAgilePitch, kPayloadMismatch };

std::string_view to_string(ScenarioName name);
std::string_view short_label(ScenarioName name);
ScenarioName parse_scenario_name(std::string_view text);

struct Scenario {
  ScenarioName name = ScenarioName::kNominalHover;
  Params plant;
  /// Parameters the controller is designed against.
  Params controller_model;
  LqrWeights weights;
};

/// Knobs that turn the nominal plant and weights into the four scenarios.
struct ScenarioFactors {
  double heavy_mass = 1.5;
  double heavy_inertia = 1.3;
  double agile_attitude_weight = 10.0;
  double agile_torque_weight = 0.25;
  double mismatch_mass = 1.4;
  double mismatch_inertia = 1.2;
};

Scenario make_scenario(ScenarioName name, const Params& nominal, const LqrWeights& weights,
                       const ScenarioFactors& factors = {});
std::vector<Scenario> default_scenarios();

/// Local amplification diagnostic of the raw closed loop.
struct LocalAnalysis {
  Matrix a_cl;
  /// Closed-loop equilibrium (θ = 0, zero rates) where the Jacobian is taken;
  /// the origin unless the plant differs from the controller model.
  StateVector operating_point = StateVector::Zero();
  double rho = 0.0;
  double kappa_v = 1.0;
  PeakGainResult g_peak;
};

/// The closed-loop map s ↦ dynamics_step(s, gain.control(s)) for a scenario.
StateVector closed_loop_step(const Scenario& scenario, const FeedbackGain& gain,
                             const StateVector& s);

/// Throws ScenarioInvalid if the plant loop under `gain` is not Schur stable.
LocalAnalysis linearize_closed_loop(const Scenario& scenario, const FeedbackGain& gain);

enum class Arm { kWhite, kFiltered };
std::string_view to_string(Arm arm);

struct BridgeConfig {
  std::size_t rollouts = 48;
  std::size_t horizon = 80;
  std::uint64_t base_seed = 0;
  std::string stream_tag = "ci3";
  /// Torque perturbation std per unit level (N m); thrust uses m g.
  double torque_scale = 0.1;
  double ar_coefficient = 0.85;
  std::size_t threads = 1;
  TrajectorySink sink;
};

/// Injection noise for one arm: sigma = level, channel scales (m g, torque_scale).
NoiseSpec bridge_noise(const Scenario& scenario, double level, Arm arm,
                       const BridgeConfig& config);

GenericLoop make_generic_loop(const Scenario& scenario, const FeedbackGain& gain);

inline constexpr double kMaxDivergedFraction = 0.01;

/// One RolloutMetrics per seed. Both arms share plant, controller and
/// smoother; they differ only in the temporal shape of the injection.
/// Throws ScenarioRunFailed if more than 1% of rollouts diverge.
std::vector<RolloutMetrics> run_bridge_scenario(const Scenario& scenario,
                                                const FeedbackGain& gain, double level,
                                                Arm arm, const SuppressorConfig& suppressor,
                                                std::span<const std::uint64_t> seeds,
                                                const BridgeConfig& config);

}  // namespace nonnormal::quadrotor
