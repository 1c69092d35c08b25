#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "nonnormal/errors.h"
#include "nonnormal/quadrotor.h"
#include "oracles.h"

namespace nonnormal::quadrotor {
namespace {

Scenario scenario(ScenarioName name) {
  return make_scenario(name, Params{}, LqrWeights{});
}

TEST(Dynamics, HoverIsEquilibrium) {
  const Params p;
  StateVector s = StateVector::Zero();
  s(0) = 0.3;
  s(1) = -1.2;
  const InputVector hover(p.hover_thrust(), 0.0);
  for (int i = 0; i < 100; ++i) s = dynamics_step(s, hover, p);
  EXPECT_NEAR(s(0), 0.3, 1e-12);
  EXPECT_NEAR(s(1), -1.2, 1e-12);
  EXPECT_LT(s.tail<4>().norm(), 1e-12);
}

TEST(Dynamics, FreeFallMatchesKinematics) {
  const Params p;
  State s;
  s.vx = 0.5;
  s.vz = 2.0;
  for (int i = 0; i < 50; ++i) s = dynamics_step(s, Input{}, p);
  const double t = 50 * p.dt;
  EXPECT_NEAR(s.x, 0.5 * t, 1e-10);
  EXPECT_NEAR(s.z, 2.0 * t - 0.5 * p.gravity * t * t, 1e-10);
  EXPECT_NEAR(s.vz, 2.0 - p.gravity * t, 1e-10);
  EXPECT_EQ(s.theta, 0.0);
}

TEST(Dynamics, HorizontalMomentumConservedWithoutInput) {
  const Params p;
  State s;
  s.vx = -0.7;
  s.vz = 1.0;
  s.theta = 0.4;
  s.omega = 2.5;
  for (int i = 0; i < 500; ++i) {
    const State next = dynamics_step(s, Input{}, p);
    EXPECT_LT(std::abs(p.mass * (next.vx - s.vx)), 1e-10);
    s = next;
  }
  EXPECT_EQ(s.vx, -0.7);
}

TEST(Dynamics, TorqueOnlyStepSpinsWithoutTranslation) {
  const Params p;
  const StateVector s = dynamics_step(StateVector::Zero(), InputVector(0.0, 0.01), p);
  // θ̈ = u₂/I = 1 rad/s² held for one step.
  EXPECT_NEAR(s(5), p.dt, 1e-15);
  EXPECT_NEAR(s(2), 0.5 * p.dt * p.dt, 1e-15);
  EXPECT_EQ(s(0), 0.0);
}

TEST(Dynamics, ParamsValidation) {
  Params p;
  p.mass = 0.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = Params{};
  p.dt = 0.1;
  EXPECT_THROW(p.validate(), InvalidArgument);
  LqrWeights w;
  w.input[0] = -1.0;
  EXPECT_THROW(w.validate(), InvalidArgument);
}

TEST(Linearization, MatchesFiniteDifferences) {
  const Params p;
  const DiscreteLinearization lin = hover_linearization(p);
  const Eigen::VectorXd x0 = StateVector::Zero();
  const InputVector u0(p.hover_thrust(), 0.0);
  const Eigen::MatrixXd ja = testing::finite_difference_jacobian(
      [&](const Eigen::VectorXd& s) -> Eigen::VectorXd {
        return dynamics_step(StateVector(s), u0, p);
      },
      x0, 1e-6);
  const Eigen::MatrixXd jb = testing::finite_difference_jacobian(
      [&](const Eigen::VectorXd& u) -> Eigen::VectorXd {
        return dynamics_step(StateVector::Zero(), InputVector(u), p);
      },
      Eigen::VectorXd(u0), 1e-6);
  EXPECT_LT((ja - lin.a).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((jb - lin.b).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Lqr, NominalGainMatchesReference) {
  // Reference gains from an independent DARE solve on expm(F h), which equals
  // the degree-4 Taylor polynomial here because F⁴ = 0.
  GainMatrix expected;
  expected << 0, 18.289765451726854, 0, 0, 8.3684576196197575, 0,
      -2.599579427147058, 0, 3.3711866398948471, -1.569223290202127, 0, 0.36374876504072035;
  const FeedbackGain k = design_controller(Params{}, LqrWeights{});
  EXPECT_LT((k.k - expected).cwiseAbs().maxCoeff(), 1e-7);
  EXPECT_EQ(k.hover_input, InputVector(9.81, 0.0));
  EXPECT_GT(k.iterations, 0u);
}

TEST(Lqr, ScenarioGainsMatchReference) {
  const Scenario heavy = scenario(ScenarioName::kHeavyPayload);
  GainMatrix heavy_k;
  heavy_k << 0, 18.710481297597745, 0, 0, 9.5467091152693619, 0,
      -2.8624680827664628, 0, 3.8049921804172246, -1.7435297636725076, 0, 0.42062299905153483;
  EXPECT_LT((design_controller(heavy.controller_model, heavy.weights).k - heavy_k)
                .cwiseAbs().maxCoeff(),
            1e-7);

  const Scenario agile = scenario(ScenarioName::kAgilePitch);
  GainMatrix agile_k;
  agile_k << 0, 18.289765451726854, 0, 0, 8.3684576196197575, 0,
      -1.4231501504152957, 0, 3.641550770766909, -1.1220985524887626, 0, 0.52302783176391177;
  const FeedbackGain ka = design_controller(agile.controller_model, agile.weights);
  EXPECT_LT((ka.k - agile_k).cwiseAbs().maxCoeff(), 1e-7);
  const FeedbackGain kn = design_controller(Params{}, LqrWeights{});
  EXPECT_GT(std::abs(ka.k(1, 2)), std::abs(kn.k(1, 2)));
}

TEST(Scenarios, ConstructionAndParsing) {
  const auto all = default_scenarios();
  ASSERT_EQ(all.size(), 4u);
  EXPECT_EQ(all[0].plant, Params{});
  EXPECT_NEAR(all[1].plant.mass, 1.5, 1e-15);
  EXPECT_NEAR(all[1].plant.inertia, 0.013, 1e-15);
  EXPECT_EQ(all[1].plant, all[1].controller_model);
  EXPECT_NEAR(all[3].plant.mass, 1.4, 1e-15);
  EXPECT_EQ(all[3].controller_model, Params{});
  EXPECT_EQ(parse_scenario_name("heavy_payload"), ScenarioName::kHeavyPayload);
  EXPECT_EQ(parse_scenario_name("PM"), ScenarioName::kPayloadMismatch);
  EXPECT_EQ(short_label(ScenarioName::kAgilePitch), "AP");
  EXPECT_THROW(parse_scenario_name("barrel_roll"), InvalidArgument);
}

TEST(ClosedLoop, AllScenariosStableAndNonNormal) {
  for (const Scenario& s : default_scenarios()) {
    const FeedbackGain k = design_controller(s.controller_model, s.weights);
    const LocalAnalysis a = linearize_closed_loop(s, k);
    EXPECT_LT(a.rho, 1.0) << to_string(s.name);
    EXPECT_GT(a.g_peak.value, 1.0) << to_string(s.name);
    EXPECT_TRUE(a.g_peak.terminated_certified);
  }
}

TEST(ClosedLoop, JacobianMatchesFiniteDifferencesAtOperatingPoint) {
  for (const Scenario& s : default_scenarios()) {
    const FeedbackGain k = design_controller(s.controller_model, s.weights);
    const LocalAnalysis a = linearize_closed_loop(s, k);
    // The operating point is a fixed point of the closed loop.
    const StateVector next = closed_loop_step(s, k, a.operating_point);
    EXPECT_LT((next - a.operating_point).norm(), 1e-12) << to_string(s.name);
    const Eigen::MatrixXd j = testing::finite_difference_jacobian(
        [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
          return closed_loop_step(s, k, StateVector(x));
        },
        Eigen::VectorXd(a.operating_point), 1e-6);
    EXPECT_LT((j - a.a_cl).cwiseAbs().maxCoeff(), 1e-6) << to_string(s.name);
  }
}

TEST(ClosedLoop, MismatchShiftsOperatingPointDown) {
  const Scenario pm = scenario(ScenarioName::kPayloadMismatch);
  const FeedbackGain k = design_controller(pm.controller_model, pm.weights);
  const LocalAnalysis a = linearize_closed_loop(pm, k);
  // Extra weight 0.4 g must come from the altitude error: z* = −0.4 g / K_z.
  EXPECT_LT(a.operating_point(1), 0.0);
  EXPECT_NEAR(a.operating_point(1) * k.k(0, 1), -0.4 * 9.81, 1e-9);
}

TEST(ClosedLoop, HeavyPayloadSlowsTheAltitudeLoop) {
  const auto slowest_z = [](const Scenario& s) {
    const FeedbackGain k = design_controller(s.controller_model, s.weights);
    const LocalAnalysis a = linearize_closed_loop(s, k);
    Eigen::Matrix2d z;
    z << a.a_cl(1, 1), a.a_cl(1, 4), a.a_cl(4, 1), a.a_cl(4, 4);
    return z.eigenvalues().cwiseAbs().maxCoeff();
  };
  EXPECT_GT(slowest_z(scenario(ScenarioName::kHeavyPayload)),
            slowest_z(scenario(ScenarioName::kNominalHover)));
}

TEST(ClosedLoop, UnstableGainRejected) {
  FeedbackGain k = design_controller(Params{}, LqrWeights{});
  k.k = -k.k;
  EXPECT_THROW(linearize_closed_loop(scenario(ScenarioName::kNominalHover), k), ScenarioInvalid);
}

TEST(Bridge, NoiseChannels) {
  const Scenario heavy = scenario(ScenarioName::kHeavyPayload);
  const NoiseSpec white = bridge_noise(heavy, 0.1, Arm::kWhite, BridgeConfig{});
  const NoiseSpec filtered = bridge_noise(heavy, 0.1, Arm::kFiltered, BridgeConfig{});
  EXPECT_EQ(white.kind, NoiseKind::kWhite);
  EXPECT_EQ(filtered.kind, NoiseKind::kAr1);
  EXPECT_NEAR(white.channel_sigma(0), 0.1 * 1.5 * 9.81, 1e-14);
  EXPECT_NEAR(white.channel_sigma(1), 0.01, 1e-16);
}

TEST(Bridge, LevelZeroArmsIdentical) {
  const Scenario s = scenario(ScenarioName::kNominalHover);
  const FeedbackGain k = design_controller(s.controller_model, s.weights);
  BridgeConfig config;
  config.rollouts = 8;
  const std::vector<std::uint64_t> seeds{0, 1};
  const auto w = run_bridge_scenario(s, k, 0.0, Arm::kWhite, SuppressorConfig{}, seeds, config);
  const auto f =
      run_bridge_scenario(s, k, 0.0, Arm::kFiltered, SuppressorConfig{}, seeds, config);
  ASSERT_EQ(w.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(w[i].cov_trace, f[i].cov_trace);
    EXPECT_EQ(w[i].applied_input_variance, f[i].applied_input_variance);
    EXPECT_EQ(w[i].j_peak, 0.0);
  }
}

TEST(Bridge, FilteredArmReducesActionVariance) {
  const Scenario s = scenario(ScenarioName::kNominalHover);
  const FeedbackGain k = design_controller(s.controller_model, s.weights);
  BridgeConfig config;
  config.rollouts = 16;
  const std::vector<std::uint64_t> seeds{3};
  const auto w = run_bridge_scenario(s, k, 0.1, Arm::kWhite, SuppressorConfig{}, seeds, config);
  const auto f =
      run_bridge_scenario(s, k, 0.1, Arm::kFiltered, SuppressorConfig{}, seeds, config);
  EXPECT_LT(f[0].applied_input_variance, w[0].applied_input_variance);
  EXPECT_EQ(w[0].diverged_count, 0u);
  EXPECT_EQ(w[0].state_rms_selected.size(), 3u);
  EXPECT_THROW(run_bridge_scenario(s, k, -0.1, Arm::kWhite, SuppressorConfig{}, seeds, config),
               InvalidArgument);
}

TEST(Bridge, ExcessDivergenceFails) {
  const Scenario s = scenario(ScenarioName::kNominalHover);
  const FeedbackGain k = design_controller(s.controller_model, s.weights);
  BridgeConfig config;
  config.rollouts = 8;
  config.torque_scale = 50.0;
  const std::vector<std::uint64_t> seeds{0};
  EXPECT_THROW(run_bridge_scenario(s, k, 1.0, Arm::kWhite, SuppressorConfig{1.0, false}, seeds,
                                   config),
               ScenarioRunFailed);
}

}  // namespace
}  // namespace nonnormal::quadrotor
