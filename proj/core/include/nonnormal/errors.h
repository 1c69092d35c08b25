#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nonnormal {

/// Failure categories surfaced by the library. The CLI maps these onto exit
/// codes, so every thrown error carries exactly one.
enum class ErrorKind {
  kInvalidMatrix,
  kShapeError,
  kNotSchurStable,
  kNearDefective,
  kInvalidCovariance,
  kEmptyHorizon,
  kInvalidBeta,
  kInvalidArgument,
  kInsufficientSamples,
  kDegenerateGrid,
  kAmplifierControlViolated,
  kControllerDesignFailed,
  kScenarioInvalid,
  kScenarioRunFailed,
  kConfigError,
  kIoError,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define NONNORMAL_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what)                            \
        : Error(ErrorKind::k##Name, what) {}                          \
  }

NONNORMAL_DEFINE_ERROR(InvalidMatrix);
NONNORMAL_DEFINE_ERROR(ShapeError);
NONNORMAL_DEFINE_ERROR(NotSchurStable);
NONNORMAL_DEFINE_ERROR(InvalidCovariance);
NONNORMAL_DEFINE_ERROR(EmptyHorizon);
NONNORMAL_DEFINE_ERROR(InvalidBeta);
NONNORMAL_DEFINE_ERROR(InvalidArgument);
NONNORMAL_DEFINE_ERROR(InsufficientSamples);
NONNORMAL_DEFINE_ERROR(DegenerateGrid);
NONNORMAL_DEFINE_ERROR(AmplifierControlViolated);
NONNORMAL_DEFINE_ERROR(ControllerDesignFailed);
NONNORMAL_DEFINE_ERROR(ScenarioInvalid);
NONNORMAL_DEFINE_ERROR(ScenarioRunFailed);
NONNORMAL_DEFINE_ERROR(IoError);

#undef NONNORMAL_DEFINE_ERROR

/// Thrown when the eigenvector matrix is too ill-conditioned to trust κ(V).
class NearDefective : public Error {
 public:
  NearDefective(const std::string& what, double sigma_min)
      : Error(ErrorKind::kNearDefective, what), sigma_min_(sigma_min) {}

  double sigma_min() const noexcept { return sigma_min_; }

 private:
  double sigma_min_;
};

/// Config parse/validation failure. `line` is 0 when unknown.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::string field, int line = 0);

  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  std::string field_;
  int line_;
};

}  // namespace nonnormal
