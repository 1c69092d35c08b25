#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "nonnormal/config.h"
#include "nonnormal/errors.h"

namespace nonnormal {
namespace {

const std::string* find_value(const ConfigEcho& echo, const std::string& section,
                              const std::string& key) {
  for (const auto& e : echo) {
    if (e.section == section && e.key == key) return &e.value;
  }
  return nullptr;
}

TEST(Config, DefaultsMatchProtocol) {
  const ExperimentConfig c = default_config();
  EXPECT_EQ(c.base_seed, 0u);
  EXPECT_FALSE(c.base_seed_given);
  EXPECT_EQ(c.ci1.family.alpha_grid.size(), 21u);
  EXPECT_EQ(c.ci1.rollout.n_rollouts, 512u);
  EXPECT_EQ(c.ci1.rollout.horizon, 80u);
  EXPECT_EQ(c.ci1.bootstrap.n_resamples, 10000u);
  EXPECT_EQ(c.ci2.alpha, 10.0);
  EXPECT_EQ(c.ci2.filtered.kind, NoiseKind::kAr1);
  EXPECT_EQ(c.ci2.suppressor.beta, 0.85);
  EXPECT_EQ(c.ci3.scenarios.size(), 4u);
  EXPECT_EQ(c.ci3.levels, (std::vector<double>{0.0, 0.05, 0.10, 0.20}));
  EXPECT_EQ(c.ci3.bridge.rollouts, 48u);
  EXPECT_TRUE(c.formats.csv);
  EXPECT_TRUE(c.formats.json);
}

TEST(Config, EmptyTextIsDefault) {
  const ExperimentConfig c = parse_config("");
  EXPECT_EQ(to_ini(c.echo()), to_ini(default_config().echo()));
}

TEST(Config, IniValues) {
  const ExperimentConfig c = parse_config(R"(
[global]
base_seed = 17
formats = csv

[ci1]
alpha_grid = linspace(0, 4, 5)
noise_sigma = 0.1
rollouts = 64

[ci2]
beta = 0.5
filtered_kind = white

[ci3]
scenarios = nominal_hover, PM
levels = 0, 0.3
seeds = 4
)");
  EXPECT_EQ(c.base_seed, 17u);
  EXPECT_TRUE(c.base_seed_given);
  EXPECT_EQ(c.ci1.rollout.base_seed, 17u);
  EXPECT_EQ(c.ci3.bridge.base_seed, 17u);
  EXPECT_FALSE(c.formats.json);
  EXPECT_EQ(c.ci1.family.alpha_grid, (std::vector<double>{0, 1, 2, 3, 4}));
  EXPECT_NEAR(c.ci1.family.w(0, 0), 0.01, 1e-17);
  EXPECT_EQ(c.ci1.rollout.n_rollouts, 64u);
  EXPECT_EQ(c.ci2.suppressor.beta, 0.5);
  EXPECT_EQ(c.ci2.filtered.kind, NoiseKind::kWhite);
  EXPECT_EQ(c.ci2.filtered.ar_coefficient, 0.0);
  ASSERT_EQ(c.ci3.scenarios.size(), 2u);
  EXPECT_EQ(c.ci3.scenarios[1].name, quadrotor::ScenarioName::kPayloadMismatch);
  EXPECT_EQ(c.ci3.seeds, (std::vector<std::uint64_t>{4}));
}

TEST(Config, JsonValuesAndSummaryWrapper) {
  const ExperimentConfig direct =
      parse_config(R"({"ci2": {"alpha": 6.5, "rollouts": 32}, "ci3": {"levels": [0, 0.1]}})");
  EXPECT_EQ(direct.ci2.alpha, 6.5);
  EXPECT_EQ(direct.ci2.rollout.n_rollouts, 32u);
  EXPECT_EQ(direct.ci3.levels, (std::vector<double>{0.0, 0.1}));
  const ExperimentConfig wrapped =
      parse_config(R"({"experiment": "ci2", "config": {"ci2": {"alpha": "6.5"}}})");
  EXPECT_EQ(wrapped.ci2.alpha, 6.5);
}

TEST(Config, EchoRoundTripsThroughIni) {
  ExperimentConfig c = parse_config(R"(
[global]
base_seed = 99
[ci1]
alpha_grid = 0, 0.1, 2.75
perturb_member = 1
perturb_w_delta = 0.003
[ci3]
q = 1, 2, 3, 4, 5, 6
mass = 1.1
)");
  const std::string ini = to_ini(c.echo());
  const ExperimentConfig again = parse_config(ini);
  EXPECT_EQ(to_ini(again.echo()), ini);
  EXPECT_EQ(again.ci1_perturb_member, std::optional<std::size_t>{1});
  EXPECT_EQ(again.ci1_perturb_w_delta, 0.003);
  EXPECT_EQ(again.ci3_nominal.mass, 1.1);
  EXPECT_EQ(*find_value(again.echo(), "global", "base_seed"), "99");
  // Doubles survive the text form bitwise.
  EXPECT_EQ(again.ci1.family.alpha_grid[1], 0.1);
}

TEST(Config, OptionalNegativeControlsOnlyEchoedWhenSet) {
  const ConfigEcho echo = default_config().echo();
  EXPECT_EQ(find_value(echo, "ci1", "perturb_member"), nullptr);
  EXPECT_EQ(find_value(echo, "ci2", "filtered_alpha"), nullptr);
  EXPECT_NE(find_value(echo, "ci2", "beta"), nullptr);
}

TEST(Config, ErrorsCarryFieldAndLine) {
  try {
    parse_config("[ci1]\nrollouts = 64\nhorizon = many\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "ci1.horizon");
    EXPECT_EQ(e.line(), 3);
  }
  try {
    parse_config("[ci2]\n\nwobble = 1\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "ci2.wobble");
    EXPECT_EQ(e.line(), 3);
  }
  EXPECT_THROW(parse_config("[ci9]\nx = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("{\"ci1\": {\"rollouts\": }}"), ConfigError);
  EXPECT_THROW(parse_config("[ci2]\nbeta = 1.5\n"), ConfigError);
  EXPECT_THROW(parse_config("[ci3]\nlevels = 0.1, 0.2\n"), ConfigError);
  EXPECT_THROW(parse_config("[ci1]\nbootstrap_resamples = 10\n"), ConfigError);
  EXPECT_THROW(parse_config("[ci1]\nstructure = lower\n"), ConfigError);
  EXPECT_THROW(parse_config("[global]\nformats = xml\n"), ConfigError);
  EXPECT_THROW(parse_config("[ci3]\nq = 1, 2\n"), ConfigError);
}

TEST(Config, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "nonnormal_config_test.ini";
  {
    std::ofstream out(path);
    out << "[ci2]\nalpha = 3\n";
  }
  EXPECT_EQ(load_config(path.string()).ci2.alpha, 3.0);
  std::filesystem::remove(path);
  EXPECT_THROW(load_config(path.string()), IoError);
}

TEST(Config, PerturbedMemberAndCi2Member) {
  ExperimentConfig c = parse_config("[ci1]\nperturb_member = 2\nperturb_w_delta = 0.01\n");
  const auto members = c.ci1_members();
  EXPECT_NEAR(members[2].system.w()(0, 0), 0.05, 1e-15);
  EXPECT_EQ(members[3].system.w()(0, 0), members[0].system.w()(0, 0));
  EXPECT_NEAR(c.ci2_member(10.0).system.a()(0, 1), -4.3, 1e-13);
  c.ci1_perturb_member = 99;
  EXPECT_THROW(c.ci1_members(), ConfigError);
}

TEST(Config, SeedFromEnvironment) {
  ::setenv(kSeedEnvVar, "1234", 1);
  EXPECT_EQ(seed_from_environment(), std::optional<std::uint64_t>{1234});
  ::setenv(kSeedEnvVar, "abc", 1);
  EXPECT_THROW(seed_from_environment(), ConfigError);
  ::unsetenv(kSeedEnvVar);
  EXPECT_EQ(seed_from_environment(), std::nullopt);
}

TEST(OutputFormats, ParseAndPrint) {
  EXPECT_EQ(to_string(parse_formats("json,csv")), "csv,json");
  EXPECT_EQ(to_string(parse_formats("json")), "json");
  EXPECT_THROW(parse_formats("csv,yaml"), InvalidArgument);
}

}  // namespace
}  // namespace nonnormal
