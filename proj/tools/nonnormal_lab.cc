// nonnormal-lab: runs the CI-1/CI-2/CI-3 experiments and analyzes matrices.
//
// Exit status: 0 success, 1 config or I/O error, 2 uncertified analysis,
// 3 control violation, 4 any other experiment failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nonnormal/config.h"
#include "nonnormal/errors.h"
#include "nonnormal/experiments.h"
#include "nonnormal/linalg.h"
#include "nonnormal/report.h"

namespace {

namespace fs = std::filesystem;
using namespace nonnormal;

enum ExitCode : int {
  kOk = 0,
  kConfigOrIo = 1,
  kUncertified = 2,
  kControlViolation = 3,
  kExperimentFailed = 4,
};

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::size_t threads = 1;
  std::optional<std::string> formats;
  bool dump_trajectories = false;
  std::optional<double> beta;
  std::optional<std::string> filtered_kind;
};

ExperimentConfig resolve(const Options& opt) {
  ExperimentConfig config = opt.config_path.empty() ? default_config()
                                                    : load_config(opt.config_path);
  if (opt.seed) {
    config.base_seed = *opt.seed;
  } else if (!config.base_seed_given) {
    if (const auto env = seed_from_environment()) config.base_seed = *env;
  }
  if (opt.out_dir) config.output_dir = *opt.out_dir;
  if (opt.formats) {
    try {
      config.formats = parse_formats(*opt.formats);
    } catch (const Error& e) {
      throw ConfigError(e.what(), "--format");
    }
  }
  if (opt.beta) {
    config.ci2.suppressor.beta = *opt.beta;
    config.ci3.suppressor.beta = *opt.beta;
  }
  if (opt.filtered_kind) {
    try {
      config.ci2.filtered.kind = parse_noise_kind(*opt.filtered_kind);
    } catch (const Error& e) {
      throw ConfigError(e.what(), "--filtered-kind");
    }
  }
  config.threads = opt.threads;
  config.finalize();
  return config;
}

void emit(const ExperimentConfig& config, const std::string& name, const std::string& csv,
          const std::string& json, const std::string& text) {
  const fs::path dir = config.output_dir;
  if (config.formats.csv) report::write_file(dir / (name + ".csv"), csv);
  if (config.formats.json) report::write_file(dir / (name + "_summary.json"), json);
  report::write_file(dir / (name + "_summary.txt"), text);
  std::cout << text << "\n";
}

void run_ci1_cmd(const ExperimentConfig& config) {
  const CI1Result result = run_ci1(config.ci1_members(), config.ci1);
  emit(config, "ci1", report::ci1_csv(result), report::ci1_json(result, config),
       report::ci1_text(result));
}

void run_ci2_cmd(const ExperimentConfig& config, bool dump) {
  CI2Config ci2 = config.ci2;
  std::optional<report::TrajectoryWriter> writer;
  if (dump) {
    writer.emplace(fs::path(config.output_dir) / "ci2_trajectories.csv");
    ci2.sink = writer->sink();
  }
  const FamilyMember member = config.ci2_member(ci2.alpha);
  CI2Result result;
  if (config.ci2_filtered_alpha) {
    const FamilyMember other = config.ci2_member(*config.ci2_filtered_alpha);
    result = run_ci2_arms(member.system, other.system, ci2);
    result.alpha = member.alpha;
  } else {
    result = run_ci2(member, ci2);
  }
  emit(config, "ci2", report::ci2_csv(result), report::ci2_json(result, config),
       report::ci2_text(result));
}

void run_ci3_cmd(const ExperimentConfig& config, bool dump) {
  CI3Config ci3 = config.ci3;
  std::optional<report::TrajectoryWriter> writer;
  if (dump) {
    writer.emplace(fs::path(config.output_dir) / "ci3_trajectories.csv");
    ci3.sink = writer->sink();
  }
  const CI3Result result = run_ci3(ci3);
  if (config.formats.csv) {
    const fs::path dir = config.output_dir;
    report::write_file(dir / "ci3_reductions.csv", report::ci3_reductions_csv(result.summary));
    report::write_file(dir / "ci3_aggregate.csv", report::ci3_aggregate_csv(result.summary));
    report::write_file(dir / "ci3_stress.csv", report::ci3_stress_csv(result.summary));
  }
  emit(config, "ci3", report::ci3_csv(result), report::ci3_json(result, config),
       report::ci3_text(result));
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int run_analyze(const std::string& path) {
  const Matrix a = read_matrix_file(path);
  require_square(a, "matrix");
  const double rho = spectral_radius(a);
  std::cout << "dimension: " << a.rows() << "\n";
  std::cout << "rho: " << g17(rho) << "\n";
  try {
    std::cout << "kappa_v: " << g17(eigenvector_condition(a)) << "\n";
  } catch (const NearDefective& e) {
    std::cout << "kappa_v: inf (near defective, sigma_min " << g17(e.sigma_min()) << ")\n";
  }
  const bool stable = rho < 1.0;
  const PeakGainResult peak = stable ? peak_gain(a) : peak_gain_search(a, kDefaultPeakGainMaxSteps);
  const bool certified = stable && peak.terminated_certified;
  std::cout << "g_peak: " << g17(peak.value) << "\n";
  std::cout << "g_peak_argmax_step: " << peak.argmax_step << "\n";
  std::cout << "g_peak_steps_examined: " << peak.steps_examined << "\n";
  std::cout << "g_peak_certified: " << (certified ? "true" : "false") << "\n";
  std::cout << "lyapunov_solvable: " << (stable ? "true" : "false") << "\n";
  return certified ? kOk : kUncertified;
}

void add_experiment_options(CLI::App* cmd, Options& opt) {
  cmd->add_option("--config", opt.config_path, "INI or JSON experiment config")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", opt.seed, "base seed (falls back to NONNORMAL_LAB_SEED)");
  cmd->add_option("--out", opt.out_dir, "output directory");
  cmd->add_option("--threads", opt.threads, "rollout workers; results do not depend on it")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--format", opt.formats, "comma list of csv,json");
  cmd->add_flag("--dump-trajectories", opt.dump_trajectories,
                "write per-rollout trajectories for ci2/ci3");
  cmd->add_option("--beta", opt.beta, "suppressor coefficient override");
  cmd->add_option("--filtered-kind", opt.filtered_kind, "ci2 filtered-arm source: white|ar1");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structural amplification experiments for non-normal closed loops"};
  app.set_version_flag("--version", std::string(report::version()));
  app.require_subcommand(1);

  Options opt;
  std::string matrix_path;
  auto* ci1 = app.add_subcommand("ci1", "amplifier isolation sweep over the shear family");
  auto* ci2 = app.add_subcommand("ci2", "source-only intervention on a fixed closed loop");
  auto* ci3 = app.add_subcommand("ci3", "quadrotor bridge across scenarios and levels");
  auto* all = app.add_subcommand("all", "ci1, ci2 and ci3 in sequence");
  for (auto* cmd : {ci1, ci2, ci3, all}) add_experiment_options(cmd, opt);
  auto* analyze = app.add_subcommand("analyze", "rho, kappa(V) and G_peak of a matrix file");
  analyze->add_option("matrix", matrix_path, "whitespace-separated rows, '#' comments")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (analyze->parsed()) return run_analyze(matrix_path);

    const ExperimentConfig config = resolve(opt);
    report::ensure_directory(config.output_dir);
    if (ci1->parsed() || all->parsed()) run_ci1_cmd(config);
    if (ci2->parsed() || all->parsed()) run_ci2_cmd(config, opt.dump_trajectories);
    if (ci3->parsed() || all->parsed()) run_ci3_cmd(config, opt.dump_trajectories);
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << "nonnormal-lab: " << e.what() << "\n";
    return kConfigOrIo;
  } catch (const IoError& e) {
    std::cerr << "nonnormal-lab: " << e.what() << "\n";
    return kConfigOrIo;
  } catch (const AmplifierControlViolated& e) {
    std::cerr << "nonnormal-lab: " << e.what() << "\n";
    return kControlViolation;
  } catch (const Error& e) {
    std::cerr << "nonnormal-lab: " << e.what() << "\n";
    return analyze->parsed() ? kConfigOrIo : kExperimentFailed;
  }
}
