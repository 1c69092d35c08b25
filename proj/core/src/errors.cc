#include "nonnormal/errors.h"

namespace nonnormal {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidMatrix: return "InvalidMatrix";
    case ErrorKind::kShapeError: return "ShapeError";
    case ErrorKind::kNotSchurStable: return "NotSchurStable";
    case ErrorKind::kNearDefective: return "NearDefective";
    case ErrorKind::kInvalidCovariance: return "InvalidCovariance";
    case ErrorKind::kEmptyHorizon: return "EmptyHorizon";
    case ErrorKind::kInvalidBeta: return "InvalidBeta";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kInsufficientSamples: return "InsufficientSamples";
    case ErrorKind::kDegenerateGrid: return "DegenerateGrid";
    case ErrorKind::kAmplifierControlViolated: return "AmplifierControlViolated";
    case ErrorKind::kControllerDesignFailed: return "ControllerDesignFailed";
    case ErrorKind::kScenarioInvalid: return "ScenarioInvalid";
    case ErrorKind::kScenarioRunFailed: return "ScenarioRunFailed";
    case ErrorKind::kConfigError: return "ConfigError";
    case ErrorKind::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what),
      kind_(kind) {}

namespace {
std::string config_message(const std::string& what, const std::string& field,
                           int line) {
  std::string msg;
  if (line > 0) msg += "line " + std::to_string(line) + ": ";
  if (!field.empty()) msg += "[" + field + "] ";
  return msg + what;
}
}  // namespace

ConfigError::ConfigError(const std::string& what, std::string field, int line)
    : Error(ErrorKind::kConfigError, config_message(what, field, line)),
      field_(std::move(field)),
      line_(line) {}

}  // namespace nonnormal
