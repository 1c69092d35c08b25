#include "nonnormal/quadrotor.h"

#include <cmath>
#include <numbers>
#include <string>

#include "nonnormal/errors.h"

namespace nonnormal::quadrotor {

void Params::validate() const {
  const auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(mass) || !positive(inertia) || !positive(gravity) || !positive(dt)) {
    throw InvalidArgument("quadrotor parameters must be finite and positive");
  }
  if (dt > 0.05) throw InvalidArgument("quadrotor dt must be <= 0.05 s");
}

StateVector State::vector() const noexcept {
  StateVector v;
  v << x, z, theta, vx, vz, omega;
  return v;
}

State State::from_vector(const StateVector& v) noexcept {
  return State{v(0), v(1), v(2), v(3), v(4), v(5)};
}

StateVector continuous_dynamics(const StateVector& s, const InputVector& u, const Params& p) {
  const double theta = s(2);
  const double specific_thrust = u(0) / p.mass;
  StateVector d;
  d << s(3), s(4), s(5), -specific_thrust * std::sin(theta),
      specific_thrust * std::cos(theta) - p.gravity, u(1) / p.inertia;
  return d;
}

StateVector dynamics_step(const StateVector& s, const InputVector& u, const Params& p) {
  const double h = p.dt;
  const StateVector k1 = continuous_dynamics(s, u, p);
  const StateVector k2 = continuous_dynamics(s + 0.5 * h * k1, u, p);
  const StateVector k3 = continuous_dynamics(s + 0.5 * h * k2, u, p);
  const StateVector k4 = continuous_dynamics(s + h * k3, u, p);
  return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

State dynamics_step(const State& s, const Input& u, const Params& p) {
  return State::from_vector(dynamics_step(s.vector(), InputVector(u.thrust, u.torque), p));
}

DiscreteLinearization hover_linearization(const Params& p) {
  p.validate();
  StateMatrix f = StateMatrix::Zero();
  f(0, 3) = 1.0;
  f(1, 4) = 1.0;
  f(2, 5) = 1.0;
  f(3, 2) = -p.gravity;  // −(u1/m) cos θ at u1 = m g, θ = 0
  InputMatrix b = InputMatrix::Zero();
  b(4, 0) = 1.0 / p.mass;
  b(5, 1) = 1.0 / p.inertia;

  const double h = p.dt;
  const StateMatrix hf = h * f;
  const StateMatrix hf2 = hf * hf;
  const StateMatrix hf3 = hf2 * hf;
  const StateMatrix hf4 = hf3 * hf;
  const StateMatrix eye = StateMatrix::Identity();
  DiscreteLinearization out;
  out.a = eye + hf + hf2 / 2.0 + hf3 / 6.0 + hf4 / 24.0;
  out.b = h * (eye + hf / 2.0 + hf2 / 6.0 + hf3 / 24.0) * b;
  return out;
}

void LqrWeights::validate() const {
  for (const double q : state) {
    if (!std::isfinite(q) || q <= 0.0) throw InvalidArgument("LQR state weights must be positive");
  }
  for (const double r : input) {
    if (!std::isfinite(r) || r <= 0.0) throw InvalidArgument("LQR input weights must be positive");
  }
}

FeedbackGain design_controller(const Params& model, const LqrWeights& weights) {
  model.validate();
  weights.validate();
  const DiscreteLinearization lin = hover_linearization(model);
  const StateMatrix q = Eigen::Map<const Eigen::Matrix<double, 6, 1>>(weights.state.data())
                            .asDiagonal();
  const Eigen::Matrix2d r = Eigen::Map<const Eigen::Vector2d>(weights.input.data()).asDiagonal();
  const StateMatrix& a = lin.a;
  const InputMatrix& b = lin.b;

  StateMatrix p = q;
  FeedbackGain gain;
  bool converged = false;
  for (std::size_t i = 1; i <= kMaxRiccatiIterations; ++i) {
    const Eigen::Matrix2d s = r + b.transpose() * p * b;
    const GainMatrix k = s.ldlt().solve(b.transpose() * p * a);
    StateMatrix next = q + a.transpose() * p * (a - b * k);
    next = 0.5 * (next + next.transpose()).eval();
    const double change = (next - p).norm();
    p = next;
    if (!p.allFinite()) break;
    if (change <= kRiccatiTolerance * std::max(1.0, p.norm())) {
      gain.iterations = i;
      gain.riccati_residual = change;
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw ControllerDesignFailed("Riccati iteration did not converge in " +
                                 std::to_string(kMaxRiccatiIterations) + " iterations");
  }
  const Eigen::Matrix2d s = r + b.transpose() * p * b;
  gain.k = s.ldlt().solve(b.transpose() * p * a);
  gain.hover_input = InputVector(model.hover_thrust(), 0.0);
  const Matrix closed = a - b * gain.k;
  if (!(spectral_radius(closed) < 1.0)) {
    throw ControllerDesignFailed("LQR gain does not stabilize the design model");
  }
  return gain;
}

std::string_view to_string(ScenarioName name) {
  switch (name) {
    case ScenarioName::kNominalHover: return "nominal_hover";
    case ScenarioName::kHeavyPayload: return "heavy_payload";
    case ScenarioName::kAgilePitch: return "agile_pitch";
    case ScenarioName::kPayloadMismatch: return "payload_mismatch";
  }
  return "unknown";
}

std::string_view short_label(ScenarioName name) {
  switch (name) {
    case ScenarioName::kNominalHover: return "NH";
    case ScenarioName::kHeavyPayload: return "HP";
    case ScenarioName::kAgilePitch: return "AP";
    case ScenarioName::kPayloadMismatch: return "PM";
  }
  return "??";
}

ScenarioName parse_scenario_name(std::string_view text) {
  for (const auto name : {ScenarioName::kNominalHover, ScenarioName::kHeavyPayload,
                          ScenarioName::kAgilePitch, ScenarioName::kPayloadMismatch}) {
    if (text == to_string(name) || text == short_label(name)) return name;
  }
  throw InvalidArgument("unknown scenario '" + std::string(text) + "'");
}

Scenario make_scenario(ScenarioName name, const Params& nominal, const LqrWeights& weights,
                       const ScenarioFactors& factors) {
  Scenario s{name, nominal, nominal, weights};
  switch (name) {
    case ScenarioName::kNominalHover:
      break;
    case ScenarioName::kHeavyPayload:
      s.plant.mass *= factors.heavy_mass;
      s.plant.inertia *= factors.heavy_inertia;
      s.controller_model = s.plant;
      break;
    case ScenarioName::kAgilePitch:
      s.weights.state[2] *= factors.agile_attitude_weight;
      s.weights.state[5] *= factors.agile_attitude_weight;
      s.weights.input[1] *= factors.agile_torque_weight;
      break;
    case ScenarioName::kPayloadMismatch:
      s.plant.mass *= factors.mismatch_mass;
      s.plant.inertia *= factors.mismatch_inertia;
      break;
  }
  return s;
}

std::vector<Scenario> default_scenarios() {
  const Params nominal;
  const LqrWeights weights;
  std::vector<Scenario> out;
  for (const auto name : {ScenarioName::kNominalHover, ScenarioName::kHeavyPayload,
                          ScenarioName::kAgilePitch, ScenarioName::kPayloadMismatch}) {
    out.push_back(make_scenario(name, nominal, weights));
  }
  return out;
}

StateVector closed_loop_step(const Scenario& scenario, const FeedbackGain& gain,
                             const StateVector& s) {
  return dynamics_step(s, gain.control(s), scenario.plant);
}

LocalAnalysis linearize_closed_loop(const Scenario& scenario, const FeedbackGain& gain) {
  scenario.plant.validate();
  // Equilibrium with θ = 0 and zero rates: the feedback must supply the
  // plant's hover thrust, K_{:,(x,z)} [x; z] = u_hover_model − (m_plant g, 0).
  Eigen::Matrix2d k_pos;
  k_pos << gain.k(0, 0), gain.k(0, 1), gain.k(1, 0), gain.k(1, 1);
  const InputVector deficit =
      gain.hover_input - InputVector(scenario.plant.hover_thrust(), 0.0);
  const Eigen::FullPivLU<Eigen::Matrix2d> lu(k_pos);
  if (!lu.isInvertible()) {
    throw ScenarioInvalid("feedback has no position authority; no hover equilibrium");
  }
  const Eigen::Vector2d position = lu.solve(deficit);

  LocalAnalysis out;
  out.operating_point.setZero();
  out.operating_point(0) = position(0);
  out.operating_point(1) = position(1);

  const DiscreteLinearization lin = hover_linearization(scenario.plant);
  out.a_cl = lin.a - lin.b * gain.k;
  out.rho = spectral_radius(out.a_cl);
  if (!(out.rho < 1.0)) {
    throw ScenarioInvalid(std::string(to_string(scenario.name)) +
                          ": closed loop is not Schur stable (rho = " +
                          std::to_string(out.rho) + ")");
  }
  out.kappa_v = eigenvector_condition(out.a_cl);
  out.g_peak = peak_gain(out.a_cl);
  return out;
}

std::string_view to_string(Arm arm) { return arm == Arm::kWhite ? "white" : "filtered"; }

NoiseSpec bridge_noise(const Scenario& scenario, double level, Arm arm,
                       const BridgeConfig& config) {
  NoiseSpec noise;
  noise.kind = arm == Arm::kWhite ? NoiseKind::kWhite : NoiseKind::kAr1;
  noise.sigma = level;
  noise.ar_coefficient = arm == Arm::kWhite ? 0.0 : config.ar_coefficient;
  noise.channels = 2;
  noise.channel_scale = {scenario.plant.hover_thrust(), config.torque_scale};
  return noise;
}

GenericLoop make_generic_loop(const Scenario& scenario, const FeedbackGain& gain) {
  GenericLoop loop;
  const Params plant = scenario.plant;
  const FeedbackGain k = gain;
  loop.state_dim = 6;
  loop.step = [plant](const Vector& s, const Vector& u) -> Vector {
    return dynamics_step(StateVector(s), InputVector(u), plant);
  };
  loop.controller = [k](const Vector& s) -> Vector { return k.control(StateVector(s)); };
  loop.admissible = [](const Vector& s) {
    return std::abs(s(2)) < 0.5 * std::numbers::pi;
  };
  loop.nominal_input = gain.hover_input;
  return loop;
}

std::vector<RolloutMetrics> run_bridge_scenario(const Scenario& scenario,
                                                const FeedbackGain& gain, double level,
                                                Arm arm, const SuppressorConfig& suppressor,
                                                std::span<const std::uint64_t> seeds,
                                                const BridgeConfig& config) {
  if (!std::isfinite(level) || level < 0.0) {
    throw InvalidArgument("disturbance level must be finite and >= 0");
  }
  scenario.plant.validate();
  const GenericLoop loop = make_generic_loop(scenario, gain);
  const NoiseSpec noise = bridge_noise(scenario, level, arm, config);
  std::vector<RolloutMetrics> out;
  out.reserve(seeds.size());
  for (const std::uint64_t seed : seeds) {
    RolloutConfig rc;
    rc.horizon = config.horizon;
    rc.n_rollouts = config.rollouts;
    rc.base_seed = config.base_seed;
    rc.stream_tag = config.stream_tag;
    rc.stream_seed = seed;
    rc.selected_states = {0, 1, 2};
    rc.threads = config.threads;
    rc.sink = config.sink;
    RolloutMetrics metrics = simulate_generic(loop, noise, suppressor, rc);
    const double fraction =
        static_cast<double>(metrics.diverged_count) / static_cast<double>(config.rollouts);
    if (fraction > kMaxDivergedFraction) {
      throw ScenarioRunFailed(std::string(to_string(scenario.name)) + " level " +
                              std::to_string(level) + " seed " + std::to_string(seed) +
                              ": " + std::to_string(metrics.diverged_count) + " of " +
                              std::to_string(config.rollouts) + " rollouts diverged");
    }
    out.push_back(std::move(metrics));
  }
  return out;
}

}  // namespace nonnormal::quadrotor
