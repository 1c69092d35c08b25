#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nonnormal/experiments.h"
#include "nonnormal/quadrotor.h"

namespace nonnormal {

struct OutputFormats {
  bool csv = true;
  bool json = true;
};

OutputFormats parse_formats(std::string_view text);
std::string to_string(const OutputFormats& formats);

/// One `section.key = value` entry of a config file or echo.
struct ConfigEntry {
  std::string section;
  std::string key;
  std::string value;
};
using ConfigEcho = std::vector<ConfigEntry>;

/// Everything an experiment run depends on. Defaults are the protocol values;
/// an empty file or no file at all runs the full protocol.
struct ExperimentConfig {
  // [global]
  std::uint64_t base_seed = 0;
  /// Set when the config file names a seed; the environment fallback is
  /// consulted only otherwise.
  bool base_seed_given = false;
  std::string output_dir = "nonnormal-out";
  OutputFormats formats;
  /// Worker cap; never part of the echo since it cannot change results.
  std::size_t threads = 1;

  // [ci1]
  CI1Config ci1;
  /// Negative control: add `ci1_perturb_w_delta` to W of one member.
  std::optional<std::size_t> ci1_perturb_member;
  double ci1_perturb_w_delta = 0.0;

  // [ci2]  The member is drawn from the CI-1 family settings at ci2.alpha.
  CI2Config ci2;
  /// Negative control: hand the filtered arm the member at this α instead.
  std::optional<double> ci2_filtered_alpha;

  // [ci3]
  std::vector<quadrotor::ScenarioName> ci3_scenarios{
      quadrotor::ScenarioName::kNominalHover, quadrotor::ScenarioName::kHeavyPayload,
      quadrotor::ScenarioName::kAgilePitch, quadrotor::ScenarioName::kPayloadMismatch};
  quadrotor::Params ci3_nominal;
  quadrotor::LqrWeights ci3_weights;
  quadrotor::ScenarioFactors ci3_factors;
  CI3Config ci3;

  /// Pushes global values (seed, threads) into the experiment configs and
  /// rebuilds derived pieces (family W, CI-3 scenarios). Throws ConfigError
  /// when the combination is invalid.
  void finalize();

  /// CI-1 family after the optional negative-control perturbation.
  std::vector<FamilyMember> ci1_members() const;
  FamilyMember ci2_member(double alpha) const;

  ConfigEcho echo() const;
};

ExperimentConfig default_config();

/// INI (`[section]` / `key = value`) or JSON. A JSON document holding a
/// "config" object, such as a run summary, is read from that object.
/// Throws ConfigError with line and field on malformed input or values.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Seed used when neither the config nor the command line sets one.
inline constexpr const char* kSeedEnvVar = "NONNORMAL_LAB_SEED";
std::optional<std::uint64_t> seed_from_environment();

std::string to_ini(const ConfigEcho& echo);

}  // namespace nonnormal
