#include "nonnormal/experiments.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <tuple>

#include "nonnormal/errors.h"

namespace nonnormal {

double reduction_pct(double white, double filtered) {
  if (white == filtered) return 0.0;
  return (white - filtered) / white * 100.0;
}

// ---------------------------------------------------------------- CI-1

CI1Config::CI1Config() {
  noise.kind = NoiseKind::kWhite;
  noise.sigma = 0.2;
  noise.channels = 1;
  rollout.stream_tag = "ci1";
}

namespace {

void check_noise_matches_w(const NoiseSpec& noise, const Matrix& w) {
  if (static_cast<Eigen::Index>(noise.channels) != w.rows()) {
    throw ShapeError("CI-1 noise channels do not match W");
  }
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      const double expected =
          i == j ? noise.stationary_variance(static_cast<std::size_t>(i)) : 0.0;
      if (std::abs(w(i, j) - expected) > 1e-12 * std::max(1.0, std::abs(expected))) {
        throw InvalidArgument("CI-1 white noise does not realize the family W");
      }
    }
  }
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += "; ";
    out += item;
  }
  return out;
}

}  // namespace

CI1Result run_ci1(const std::vector<FamilyMember>& members, const CI1Config& config) {
  CI1Result result;
  result.controls = verify_family_controls(members);
  if (!result.controls.passed()) {
    throw AmplifierControlViolated("CI-1 held-constant controls drifted: " +
                                   join(result.controls.violations));
  }
  if (members.size() < 2) {
    throw DegenerateGrid("CI-1 needs at least two alpha values for a correlation");
  }
  if (config.noise.kind != NoiseKind::kWhite) {
    throw InvalidArgument("CI-1 rollouts use a white source");
  }
  check_noise_matches_w(config.noise, members.front().system.w());
  result.rho_drift = result.controls.max_rho_drift;

  const SuppressorConfig passthrough{1.0, false};
  for (const FamilyMember& m : members) {
    const LinearClosedLoop& sys = m.system;
    CI1Row row;
    row.alpha = m.alpha;
    row.kappa_v = m.kappa_v;
    row.log_kappa_v = std::log(m.kappa_v);
    row.g_peak = m.g_peak();
    row.rho = m.rho;
    const Matrix q = sys.g() * sys.w() * sys.g().transpose();
    row.cov_trace_analytic = solve_discrete_lyapunov(sys.a(), q).trace();
    row.cov_trace_empirical =
        simulate_linear(sys, config.noise, passthrough, config.rollout).cov_trace;
    row.cov_trace_expected =
        expected_rollout_moments(sys, config.noise, passthrough, config.rollout.horizon)
            .cov_trace;
    result.rows.push_back(row);
  }

  std::vector<double> kappa, log_kappa, cov, gpeak, cov_emp;
  for (const CI1Row& r : result.rows) {
    kappa.push_back(r.kappa_v);
    log_kappa.push_back(r.log_kappa_v);
    cov.push_back(r.cov_trace_analytic);
    gpeak.push_back(r.g_peak);
    cov_emp.push_back(r.cov_trace_empirical);
  }
  result.corr_kappa_cov = pearson(kappa, cov);
  result.corr_kappa_gpeak = pearson(kappa, gpeak);
  result.corr_log_kappa_cov = pearson(log_kappa, cov);
  result.corr_log_kappa_gpeak = pearson(log_kappa, gpeak);
  result.corr_kappa_cov_empirical = pearson(kappa, cov_emp);

  RandomStream cov_stream = RandomStream::derive(config.rollout.base_seed, "ci1/bootstrap",
                                                 config.bootstrap_seed, 0);
  RandomStream gpeak_stream = RandomStream::derive(config.rollout.base_seed, "ci1/bootstrap",
                                                   config.bootstrap_seed, 1);
  result.ci_cov = bootstrap_pearson_ci(kappa, cov, config.bootstrap, cov_stream);
  result.ci_gpeak = bootstrap_pearson_ci(kappa, gpeak, config.bootstrap, gpeak_stream);
  return result;
}

CI1Result run_ci1(const CI1Config& config) {
  return run_ci1(build_shear_family(config.family), config);
}

// ---------------------------------------------------------------- CI-2

CI2Config::CI2Config() {
  rollout.stream_tag = "ci2";
  white.kind = NoiseKind::kWhite;
  white.sigma = 0.2;
  filtered.kind = NoiseKind::kAr1;
  filtered.sigma = 0.2;
  filtered.ar_coefficient = 0.85;
  suppressor.beta = 0.85;
}

CI2Result run_ci2_arms(const LinearClosedLoop& white_system,
                       const LinearClosedLoop& filtered_system, const CI2Config& config) {
  if (!white_system.identical_to(filtered_system)) {
    throw AmplifierControlViolated("CI-2 arms were given different closed-loop systems");
  }
  const LinearClosedLoop& sys = white_system;
  CI2Result result;
  result.rho = spectral_radius(sys.a());
  result.kappa_v = eigenvector_condition(sys.a());
  const double g_peak = peak_gain(sys.a()).value;
  result.g_peak_white = g_peak;
  result.g_peak_filtered = g_peak;

  const SuppressorConfig passthrough{1.0, false};
  auto run_arm = [&](const std::string& label, const NoiseSpec& noise,
                     const SuppressorConfig& smoother) {
    CI2Arm arm;
    RolloutConfig rollout = config.rollout;
    if (config.sink) {
      rollout.sink = [&](std::size_t r, const Matrix& x, const Signal& raw, const Signal& app) {
        config.sink(label, r, x, raw, app);
      };
    }
    arm.metrics = simulate_linear(sys, noise, smoother, rollout);
    const StationaryMoments stationary = stationary_moments(sys, noise, smoother);
    arm.cov_trace_analytic = stationary.state_trace;
    arm.applied_variance_analytic = stationary.applied_variance;
    arm.cov_trace_expected =
        expected_rollout_moments(sys, noise, smoother, config.rollout.horizon).cov_trace;
    return arm;
  };
  result.white = run_arm("white", config.white, passthrough);
  result.filtered = run_arm("filtered", config.filtered, config.suppressor);

  const RolloutMetrics& w = result.white.metrics;
  const RolloutMetrics& f = result.filtered.metrics;
  result.reductions.action_variance_pct =
      reduction_pct(w.applied_input_variance, f.applied_input_variance);
  result.reductions.cov_trace_pct = reduction_pct(w.cov_trace, f.cov_trace);
  result.reductions.j_peak_pct = reduction_pct(w.j_peak, f.j_peak);
  return result;
}

CI2Result run_ci2(const FamilyMember& member, const CI2Config& config) {
  CI2Result result = run_ci2_arms(member.system, member.system, config);
  result.alpha = member.alpha;
  return result;
}

// ---------------------------------------------------------------- CI-3

CI3Summary summarize_ci3(const std::vector<CI3MetricRow>& rows,
                         const std::vector<std::pair<std::string, double>>& g_peaks) {
  std::vector<std::string> scenarios;
  std::vector<std::uint64_t> seeds;
  std::vector<double> levels;
  auto remember = [](auto& list, const auto& value) {
    if (std::find(list.begin(), list.end(), value) == list.end()) list.push_back(value);
  };
  using Key = std::tuple<std::string, std::uint64_t, double>;
  std::map<Key, const CI3MetricRow*> white, filtered;
  for (const CI3MetricRow& row : rows) {
    remember(scenarios, row.scenario);
    remember(seeds, row.seed);
    remember(levels, row.level);
    auto& slot = row.arm == quadrotor::Arm::kWhite ? white : filtered;
    slot[Key{row.scenario, row.seed, row.level}] = &row;
  }
  std::sort(levels.begin(), levels.end());

  CI3Summary summary;
  std::map<Key, CI3Reduction> by_key;
  for (const auto& scenario : scenarios) {
    for (const auto seed : seeds) {
      for (const double level : levels) {
        const Key key{scenario, seed, level};
        const auto w = white.find(key);
        const auto f = filtered.find(key);
        if (w == white.end() || f == filtered.end()) {
          throw InvalidArgument("CI-3 rows are missing an arm for " + scenario);
        }
        CI3Reduction red{scenario, seed, level,
                         reduction_pct(w->second->action_variance, f->second->action_variance),
                         reduction_pct(w->second->cov_trace, f->second->cov_trace),
                         reduction_pct(w->second->j_peak, f->second->j_peak)};
        summary.reductions.push_back(red);
        by_key[key] = red;
      }
    }
  }

  auto across_seeds = [&](double level, auto field) {
    std::vector<double> per_seed;
    for (const auto seed : seeds) {
      double sum = 0.0;
      for (const auto& scenario : scenarios) sum += field(by_key.at(Key{scenario, seed, level}));
      per_seed.push_back(sum / static_cast<double>(scenarios.size()));
    }
    return MeanStd{mean(per_seed), sample_stddev(per_seed)};
  };
  const auto act = [](const CI3Reduction& r) { return r.action_variance_pct; };
  const auto cov = [](const CI3Reduction& r) { return r.cov_trace_pct; };
  for (const double level : levels) {
    summary.by_level.push_back({level, across_seeds(level, act), across_seeds(level, cov)});
  }

  if (!levels.empty()) {
    const double stress_level = levels.back();
    double g_sum = 0.0;
    for (const auto& scenario : scenarios) {
      std::vector<double> a, c;
      for (const auto seed : seeds) {
        const CI3Reduction& r = by_key.at(Key{scenario, seed, stress_level});
        a.push_back(r.action_variance_pct);
        c.push_back(r.cov_trace_pct);
      }
      double g = std::nan("");
      for (const auto& [name, value] : g_peaks) {
        if (name == scenario) g = value;
      }
      g_sum += g;
      std::string label = scenario;
      try {
        label = std::string(quadrotor::short_label(quadrotor::parse_scenario_name(scenario)));
      } catch (const InvalidArgument&) {
      }
      summary.stress.push_back(
          {label, g, MeanStd{mean(a), sample_stddev(a)}, MeanStd{mean(c), sample_stddev(c)}});
    }
    const CI3LevelAggregate& agg = summary.by_level.back();
    summary.stress.push_back({"Agg", g_sum / static_cast<double>(scenarios.size()),
                              agg.action_variance_pct, agg.cov_trace_pct});
  }
  return summary;
}

CI3Result run_ci3(const CI3Config& config) {
  if (config.scenarios.empty()) throw InvalidArgument("CI-3 needs at least one scenario");
  if (config.seeds.empty()) throw InvalidArgument("CI-3 needs at least one seed");
  if (std::find(config.levels.begin(), config.levels.end(), 0.0) == config.levels.end()) {
    throw InvalidArgument("CI-3 levels must include 0");
  }
  config.suppressor.validate();

  CI3Result result;
  std::vector<std::pair<std::string, double>> g_peaks;
  using quadrotor::Arm;
  // metrics[scenario][level][arm][seed]
  std::vector<std::vector<std::array<std::vector<RolloutMetrics>, 2>>> metrics;
  for (const auto& scenario : config.scenarios) {
    const quadrotor::FeedbackGain gain =
        quadrotor::design_controller(scenario.controller_model, scenario.weights);
    const quadrotor::LocalAnalysis local = quadrotor::linearize_closed_loop(scenario, gain);
    const std::string name(quadrotor::to_string(scenario.name));
    result.diagnostics.push_back({name, local.rho, local.kappa_v, local.g_peak, gain.iterations});
    g_peaks.emplace_back(name, local.g_peak.value);

    auto& per_level = metrics.emplace_back();
    for (const double level : config.levels) {
      auto& arms = per_level.emplace_back();
      for (const Arm arm : {Arm::kWhite, Arm::kFiltered}) {
        auto& per_seed = arms[arm == Arm::kWhite ? 0 : 1];
        for (const std::uint64_t seed : config.seeds) {
          quadrotor::BridgeConfig bridge = config.bridge;
          if (config.sink) {
            char level_text[32];
            std::snprintf(level_text, sizeof level_text, "%g", level);
            const std::string label = name + "/" + level_text + "/seed" +
                                      std::to_string(seed) + "/" +
                                      std::string(quadrotor::to_string(arm));
            bridge.sink = [&config, label](std::size_t r, const Matrix& x, const Signal& raw,
                                           const Signal& app) {
              config.sink(label, r, x, raw, app);
            };
          }
          const std::uint64_t one[] = {seed};
          auto metrics = quadrotor::run_bridge_scenario(scenario, gain, level, arm,
                                                        config.suppressor, one, bridge);
          per_seed.push_back(std::move(metrics.front()));
        }
      }
    }
  }

  for (std::size_t s = 0; s < config.scenarios.size(); ++s) {
    const std::string name(quadrotor::to_string(config.scenarios[s].name));
    for (std::size_t k = 0; k < config.seeds.size(); ++k) {
      for (std::size_t l = 0; l < config.levels.size(); ++l) {
        for (const Arm arm : {Arm::kWhite, Arm::kFiltered}) {
          const RolloutMetrics& m = metrics[s][l][arm == Arm::kWhite ? 0 : 1][k];
          CI3MetricRow row;
          row.scenario = name;
          row.seed = config.seeds[k];
          row.level = config.levels[l];
          row.arm = arm;
          row.action_variance = m.applied_input_variance;
          row.cov_trace = m.cov_trace;
          row.j_peak = m.j_peak;
          row.state_rms_x = m.state_rms_selected.at(0);
          row.state_rms_z = m.state_rms_selected.at(1);
          row.state_rms_theta = m.state_rms_selected.at(2);
          row.state_rms_full = m.state_rms_full;
          row.control_rms = m.control_rms;
          row.diverged_count = m.diverged_count;
          result.rows.push_back(std::move(row));
        }
      }
    }
  }
  result.summary = summarize_ci3(result.rows, g_peaks);
  return result;
}

}  // namespace nonnormal
