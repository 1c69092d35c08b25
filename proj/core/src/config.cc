#include "nonnormal/config.h"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "nonnormal/errors.h"

namespace nonnormal {

namespace {

using Json = nlohmann::ordered_json;

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(trim(text.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  if (out.size() == 1 && out.front().empty()) out.clear();
  return out;
}

// Shortest text that reads back to the same double.
std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
std::string join(const std::vector<T>& values, std::string (*fmt)(T)) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += fmt(values[i]);
  }
  return out;
}

std::string format_u64(std::uint64_t v) { return std::to_string(v); }

// Thrown by value parsers; the caller attaches field and line.
struct BadValue {
  std::string message;
};

double parse_double(const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
    throw BadValue{"expected a finite number, got '" + text + "'"};
  }
  return v;
}

std::uint64_t parse_u64(const std::string& text) {
  std::uint64_t v = 0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc() || res.ptr != end) {
    throw BadValue{"expected a non-negative integer, got '" + text + "'"};
  }
  return v;
}

std::size_t parse_count(const std::string& text) {
  const std::uint64_t v = parse_u64(text);
  if (v == 0) throw BadValue{"expected a positive integer, got '" + text + "'"};
  return static_cast<std::size_t>(v);
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "on" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "off" || text == "no" || text == "0") return false;
  throw BadValue{"expected true/false, got '" + text + "'"};
}

// Comma list, or linspace(start, stop, count).
std::vector<double> parse_double_list(const std::string& text) {
  const std::string prefix = "linspace(";
  if (text.rfind(prefix, 0) == 0 && !text.empty() && text.back() == ')') {
    const auto args = split(text.substr(prefix.size(), text.size() - prefix.size() - 1), ',');
    if (args.size() != 3) throw BadValue{"linspace takes (start, stop, count)"};
    return linspace(parse_double(args[0]), parse_double(args[1]),
                    static_cast<std::size_t>(parse_count(args[2])));
  }
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_double(item));
  return out;
}

std::vector<std::uint64_t> parse_u64_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_u64(item));
  return out;
}

std::string_view structure_name(ShearStructure s) {
  return s == ShearStructure::kSuperdiagonal ? "superdiagonal" : "strict_upper";
}

ShearStructure parse_structure(const std::string& text) {
  if (text == "superdiagonal") return ShearStructure::kSuperdiagonal;
  if (text == "strict_upper") return ShearStructure::kStrictUpper;
  throw BadValue{"expected superdiagonal or strict_upper, got '" + text + "'"};
}

NoiseKind parse_kind(const std::string& text) {
  try {
    return parse_noise_kind(text);
  } catch (const Error&) {
    throw BadValue{"expected white or ar1, got '" + text + "'"};
  }
}

template <std::size_t N>
std::array<double, N> parse_array(const std::string& text) {
  const std::vector<double> values = parse_double_list(text);
  if (values.size() != N) {
    throw BadValue{"expected " + std::to_string(N) + " values, got " +
                   std::to_string(values.size())};
  }
  std::array<double, N> out{};
  std::copy(values.begin(), values.end(), out.begin());
  return out;
}

template <std::size_t N>
std::string format_array(const std::array<double, N>& values) {
  return join(std::vector<double>(values.begin(), values.end()), &format_double);
}

Vector to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

struct Field {
  const char* section;
  const char* key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  // Empty optional: omitted from the echo.
  std::function<std::optional<std::string>(const ExperimentConfig&)> get;
};

#define NN_DOUBLE(sec, name, member)                                                    \
  Field {                                                                               \
    sec, name, [](ExperimentConfig& c, const std::string& v) { c.member = parse_double(v); }, \
        [](const ExperimentConfig& c) -> std::optional<std::string> {                   \
          return format_double(c.member);                                               \
        }                                                                               \
  }
#define NN_COUNT(sec, name, member)                                                     \
  Field {                                                                               \
    sec, name, [](ExperimentConfig& c, const std::string& v) { c.member = parse_count(v); }, \
        [](const ExperimentConfig& c) -> std::optional<std::string> {                   \
          return std::to_string(c.member);                                              \
        }                                                                               \
  }
#define NN_U64(sec, name, member)                                                       \
  Field {                                                                               \
    sec, name, [](ExperimentConfig& c, const std::string& v) { c.member = parse_u64(v); }, \
        [](const ExperimentConfig& c) -> std::optional<std::string> {                   \
          return std::to_string(c.member);                                              \
        }                                                                               \
  }
#define NN_BOOL(sec, name, member)                                                      \
  Field {                                                                               \
    sec, name, [](ExperimentConfig& c, const std::string& v) { c.member = parse_bool(v); }, \
        [](const ExperimentConfig& c) -> std::optional<std::string> {                   \
          return c.member ? "true" : "false";                                           \
        }                                                                               \
  }
#define NN_ARRAY(sec, name, member, n)                                                  \
  Field {                                                                               \
    sec, name,                                                                          \
        [](ExperimentConfig& c, const std::string& v) { c.member = parse_array<n>(v); }, \
        [](const ExperimentConfig& c) -> std::optional<std::string> {                   \
          return format_array(c.member);                                                \
        }                                                                               \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      // global
      {"global", "base_seed",
       [](ExperimentConfig& c, const std::string& v) {
         c.base_seed = parse_u64(v);
         c.base_seed_given = true;
       },
       [](const ExperimentConfig& c) -> std::optional<std::string> {
         return std::to_string(c.base_seed);
       }},
      {"global", "output_dir",
       [](ExperimentConfig& c, const std::string& v) {
         if (v.empty()) throw BadValue{"output_dir must not be empty"};
         c.output_dir = v;
       },
       // Not echoed: where results land must not change the summaries.
       [](const ExperimentConfig&) -> std::optional<std::string> { return std::nullopt; }},
      {"global", "formats",
       [](ExperimentConfig& c, const std::string& v) {
         try {
           c.formats = parse_formats(v);
         } catch (const Error& e) {
           throw BadValue{e.what()};
         }
       },
       [](const ExperimentConfig& c) -> std::optional<std::string> {
         return to_string(c.formats);
       }},

      // ci1
      {"ci1", "eigenvalues",
       [](ExperimentConfig& c, const std::string& v) {
         c.ci1.family.eigenvalues = parse_double_list(v);
       },
       [](const ExperimentConfig& c) -> std::optional<std::string> {
         return join(c.ci1.family.eigenvalues, &format_double);
       }},
      {"ci1", "alpha_grid",
       [](ExperimentConfig& c, const std::string& v) {
         c.ci1.family.alpha_grid = parse_double_list(v);
       },
       [](const ExperimentConfig& c) -> std::optional<std::string> {
         return join(c.ci1.family.alpha_grid, &format_double);
       }},
      {"ci1", "structure",
       [](ExperimentConfig& c, const std::string& v) {
         c.ci1.family.structure = parse_structure(v);
       },
       [](const ExperimentConfig& c) -> std::optional<std::string> {
         return std::string(structure_name(c.ci1.family.structure));
       }},
      {"ci1", "g",
       [](ExperimentConfig& c, const std::string& v) {
         c.ci1.family.g = to_eigen(parse_double_list(v));
       },
       [](const ExperimentConfig& c) -> std::optional<std::string> {
         return join(std::vector<double>(c.ci1.family.g.data(),
                                         c.ci1.family.g.data() + c.ci1.family.g.size()),
                     &format_double);
       }},
      NN_DOUBLE("ci1", "noise_sigma", ci1.noise.sigma),
      NN_COUNT("ci1", "horizon", ci1.rollout.horizon),
      NN_COUNT("ci1", "rollouts", ci1.rollout.n_rollouts),
      NN_COUNT("ci1", "bootstrap_resamples", ci1.bootstrap.n_resamples),
      NN_DOUBLE("ci1", "bootstrap_level", ci1.bootstrap.level),
      NN_U64("ci1", "bootstrap_seed", ci1.bootstrap_seed),
      {"ci1", "perturb_member",
       [](ExperimentConfig& c, const std::string& v) {
         c.ci1_perturb_member = static_cast<std::size_t>(parse_u64(v));
       },
       [](const ExperimentConfig& c) -> std::optional<std::string> {
         if (!c.ci1_perturb_member) return std::nullopt;
         return std::to_string(*c.ci1_perturb_member);
       }},
      {"ci1", "perturb_w_delta",
       [](ExperimentConfig& c, const std::string& v) { c.ci1_perturb_w_delta = parse_double(v); },
       [](const ExperimentConfig& c) -> std::optional<std::string> {
         if (!c.ci1_perturb_member) return std::nullopt;
         return format_double(c.ci1_perturb_w_delta);
       }},

      // ci2
      NN_DOUBLE("ci2", "alpha", ci2.alpha),
      NN_COUNT("ci2", "horizon", ci2.rollout.horizon),
      NN_COUNT("ci2", "rollouts", ci2.rollout.n_rollouts),
      NN_DOUBLE("ci2", "white_sigma", ci2.white.sigma),
      {"ci2", "filtered_kind",
       [](ExperimentConfig& c, const std::string& v) { c.ci2.filtered.kind = parse_kind(v); },
       [](const ExperimentConfig& c) -> std::optional<std::string> {
         return std::string(to_string(c.ci2.filtered.kind));
       }},
      NN_DOUBLE("ci2", "filtered_sigma", ci2.filtered.sigma),
      NN_DOUBLE("ci2", "filtered_ar", ci2.filtered.ar_coefficient),
      NN_DOUBLE("ci2", "beta", ci2.suppressor.beta),
      NN_BOOL("ci2", "suppressor", ci2.suppressor.enabled),
      {"ci2", "filtered_alpha",
       [](ExperimentConfig& c, const std::string& v) { c.ci2_filtered_alpha = parse_double(v); },
       [](const ExperimentConfig& c) -> std::optional<std::string> {
         if (!c.ci2_filtered_alpha) return std::nullopt;
         return format_double(*c.ci2_filtered_alpha);
       }},

      // ci3
      {"ci3", "scenarios",
       [](ExperimentConfig& c, const std::string& v) {
         c.ci3_scenarios.clear();
         for (const auto& item : split(v, ',')) {
           try {
             c.ci3_scenarios.push_back(quadrotor::parse_scenario_name(item));
           } catch (const Error& e) {
             throw BadValue{e.what()};
           }
         }
         if (c.ci3_scenarios.empty()) throw BadValue{"at least one scenario is required"};
       },
       [](const ExperimentConfig& c) -> std::optional<std::string> {
         std::string out;
         for (const auto name : c.ci3_scenarios) {
           if (!out.empty()) out += ", ";
           out += quadrotor::to_string(name);
         }
         return out;
       }},
      {"ci3", "levels",
       [](ExperimentConfig& c, const std::string& v) { c.ci3.levels = parse_double_list(v); },
       [](const ExperimentConfig& c) -> std::optional<std::string> {
         return join(c.ci3.levels, &format_double);
       }},
      {"ci3", "seeds",
       [](ExperimentConfig& c, const std::string& v) { c.ci3.seeds = parse_u64_list(v); },
       [](const ExperimentConfig& c) -> std::optional<std::string> {
         return join(c.ci3.seeds, &format_u64);
       }},
      NN_COUNT("ci3", "rollouts", ci3.bridge.rollouts),
      NN_COUNT("ci3", "horizon", ci3.bridge.horizon),
      NN_DOUBLE("ci3", "torque_scale", ci3.bridge.torque_scale),
      NN_DOUBLE("ci3", "ar_coefficient", ci3.bridge.ar_coefficient),
      NN_DOUBLE("ci3", "beta", ci3.suppressor.beta),
      NN_BOOL("ci3", "suppressor", ci3.suppressor.enabled),
      NN_DOUBLE("ci3", "mass", ci3_nominal.mass),
      NN_DOUBLE("ci3", "inertia", ci3_nominal.inertia),
      NN_DOUBLE("ci3", "gravity", ci3_nominal.gravity),
      NN_DOUBLE("ci3", "dt", ci3_nominal.dt),
      NN_ARRAY("ci3", "q", ci3_weights.state, 6),
      NN_ARRAY("ci3", "r", ci3_weights.input, 2),
      NN_DOUBLE("ci3", "heavy_mass", ci3_factors.heavy_mass),
      NN_DOUBLE("ci3", "heavy_inertia", ci3_factors.heavy_inertia),
      NN_DOUBLE("ci3", "agile_attitude_weight", ci3_factors.agile_attitude_weight),
      NN_DOUBLE("ci3", "agile_torque_weight", ci3_factors.agile_torque_weight),
      NN_DOUBLE("ci3", "mismatch_mass", ci3_factors.mismatch_mass),
      NN_DOUBLE("ci3", "mismatch_inertia", ci3_factors.mismatch_inertia),
  };
  return table;
}

#undef NN_DOUBLE
#undef NN_COUNT
#undef NN_U64
#undef NN_BOOL
#undef NN_ARRAY

const Field* find_field(const std::string& section, const std::string& key) {
  for (const Field& f : fields()) {
    if (section == f.section && key == f.key) return &f;
  }
  return nullptr;
}

struct RawEntry {
  std::string section;
  std::string key;
  std::string value;
  int line = 0;
};

ExperimentConfig apply_entries(const std::vector<RawEntry>& entries) {
  ExperimentConfig config = default_config();
  for (const RawEntry& e : entries) {
    const std::string field = e.section + "." + e.key;
    const Field* f = find_field(e.section, e.key);
    if (!f) throw ConfigError("unknown key", field, e.line);
    try {
      f->set(config, e.value);
    } catch (const BadValue& bad) {
      throw ConfigError(bad.message, field, e.line);
    }
  }
  config.finalize();
  return config;
}

// Line numbers of `key = value` lines, keyed by "section.key".
std::map<std::string, int> ini_key_lines(std::string_view text) {
  std::map<std::string, int> lines;
  std::string section;
  int number = 0;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t[0] == '[') {
      section = trim(t.substr(1, t.find(']') - 1));
    } else if (const auto eq = t.find('='); eq != std::string::npos) {
      lines.emplace((section.empty() ? "global" : section) + "." + trim(t.substr(0, eq)),
                    number);
    }
  }
  return lines;
}

std::vector<RawEntry> read_ini_entries(std::string_view text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(e.message(), "", static_cast<int>(e.line()));
  }
  const auto lines = ini_key_lines(text);
  std::vector<RawEntry> entries;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      // Key outside any section.
      entries.push_back({"global", name, node.data(), lines.count("global." + name)
                                                          ? lines.at("global." + name)
                                                          : 0});
      continue;
    }
    if (name != "global" && name != "ci1" && name != "ci2" && name != "ci3") {
      throw ConfigError("unknown section", name, 0);
    }
    for (const auto& [key, leaf] : node) {
      const std::string path = name + "." + key;
      entries.push_back({name, key, trim(leaf.data()), lines.count(path) ? lines.at(path) : 0});
    }
  }
  return entries;
}

std::string json_scalar_text(const Json& v, const std::string& field) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) return format_double(v.get<double>());
  throw ConfigError("expected a scalar value", field, 0);
}

std::vector<RawEntry> read_json_entries(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const int line =
        1 + static_cast<int>(std::count(text.begin(), text.begin() + upto, '\n'));
    throw ConfigError(e.what(), "", line);
  }
  if (!root.is_object()) throw ConfigError("top level must be an object", "", 1);
  if (root.contains("config") && root["config"].is_object()) root = root["config"];
  std::vector<RawEntry> entries;
  for (const auto& [section, body] : root.items()) {
    if (!body.is_object()) throw ConfigError("section must be an object", section, 0);
    if (section != "global" && section != "ci1" && section != "ci2" && section != "ci3") {
      throw ConfigError("unknown section", section, 0);
    }
    for (const auto& [key, value] : body.items()) {
      const std::string field = section + "." + key;
      std::string text_value;
      if (value.is_array()) {
        for (const auto& item : value) {
          if (!text_value.empty()) text_value += ", ";
          text_value += json_scalar_text(item, field);
        }
      } else {
        text_value = json_scalar_text(value, field);
      }
      entries.push_back({section, key, text_value, 0});
    }
  }
  return entries;
}

}  // namespace

OutputFormats parse_formats(std::string_view text) {
  OutputFormats out{false, false};
  for (const auto& item : split(text, ',')) {
    if (item == "csv") {
      out.csv = true;
    } else if (item == "json") {
      out.json = true;
    } else {
      throw InvalidArgument("unknown output format '" + item + "' (csv, json)");
    }
  }
  return out;
}

std::string to_string(const OutputFormats& formats) {
  std::string out;
  if (formats.csv) out = "csv";
  if (formats.json) out += out.empty() ? "json" : ",json";
  return out;
}

void ExperimentConfig::finalize() {
  const double variance = ci1.noise.sigma * ci1.noise.sigma;
  ci1.noise.kind = NoiseKind::kWhite;
  ci1.noise.channels = 1;
  ci1.family.w = Matrix::Constant(1, 1, variance);
  ci2.white.kind = NoiseKind::kWhite;
  if (ci2.filtered.kind == NoiseKind::kWhite) ci2.filtered.ar_coefficient = 0.0;

  ci1.rollout.base_seed = base_seed;
  ci2.rollout.base_seed = base_seed;
  ci3.bridge.base_seed = base_seed;
  ci1.rollout.threads = threads;
  ci2.rollout.threads = threads;
  ci3.bridge.threads = threads;

  try {
    ci3.scenarios.clear();
    for (const auto name : ci3_scenarios) {
      ci3.scenarios.push_back(
          quadrotor::make_scenario(name, ci3_nominal, ci3_weights, ci3_factors));
    }
    ci1.rollout.validate();
    ci1.noise.validate();
    if (!(ci1.noise.sigma > 0.0)) throw InvalidArgument("ci1 noise_sigma must be positive");
    build_shear_family(ci1.family);
    ci2.rollout.validate();
    ci2.white.validate();
    ci2.filtered.validate();
    ci2.suppressor.validate();
    ci3.suppressor.validate();
    ci3_nominal.validate();
    ci3_weights.validate();
    if (ci3.levels.empty() || ci3.seeds.empty()) {
      throw InvalidArgument("ci3 levels and seeds must be non-empty");
    }
    for (const double level : ci3.levels) {
      if (level < 0.0) throw InvalidArgument("ci3 levels must be >= 0");
    }
    if (std::find(ci3.levels.begin(), ci3.levels.end(), 0.0) == ci3.levels.end()) {
      throw InvalidArgument("ci3 levels must include 0");
    }
    if (ci1.bootstrap.n_resamples < 1000) {
      throw InvalidArgument("ci1 bootstrap_resamples must be >= 1000");
    }
    if (!(ci1.bootstrap.level > 0.0 && ci1.bootstrap.level < 1.0)) {
      throw InvalidArgument("ci1 bootstrap_level must lie in (0, 1)");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what(), "", 0);
  }
}

std::vector<FamilyMember> ExperimentConfig::ci1_members() const {
  std::vector<FamilyMember> members = build_shear_family(ci1.family);
  if (ci1_perturb_member) {
    const std::size_t i = *ci1_perturb_member;
    if (i >= members.size()) {
      throw ConfigError("member index out of range", "ci1.perturb_member", 0);
    }
    const LinearClosedLoop& s = members[i].system;
    const Matrix w = s.w() + ci1_perturb_w_delta * Matrix::Identity(s.w().rows(), s.w().cols());
    members[i].system = LinearClosedLoop(s.a(), s.g(), w);
  }
  return members;
}

FamilyMember ExperimentConfig::ci2_member(double alpha) const {
  ShearFamilySpec spec = ci1.family;
  spec.alpha_grid = {alpha};
  return build_shear_family(spec).front();
}

ConfigEcho ExperimentConfig::echo() const {
  ConfigEcho out;
  for (const Field& f : fields()) {
    if (auto value = f.get(*this)) out.push_back({f.section, f.key, std::move(*value)});
  }
  return out;
}

ExperimentConfig default_config() {
  ExperimentConfig config;
  config.finalize();
  return config;
}

ExperimentConfig parse_config(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') {
    return apply_entries(read_json_entries(text));
  }
  return apply_entries(read_ini_entries(text));
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::optional<std::uint64_t> seed_from_environment() {
  const char* value = std::getenv(kSeedEnvVar);
  if (!value || !*value) return std::nullopt;
  try {
    return parse_u64(trim(value));
  } catch (const BadValue& bad) {
    throw ConfigError(bad.message, kSeedEnvVar, 0);
  }
}

std::string to_ini(const ConfigEcho& echo) {
  std::string out;
  std::string section;
  for (const ConfigEntry& e : echo) {
    if (e.section != section) {
      if (!section.empty()) out += "\n";
      section = e.section;
      out += "[" + section + "]\n";
    }
    out += e.key + " = " + e.value + "\n";
  }
  return out;
}

}  // namespace nonnormal
