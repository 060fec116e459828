#pragma once

#include <stdexcept>
#include <string>

namespace csm {

/// Base class for all errors thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct NonOrthonormalBasis : Error {
  NonOrthonormalBasis(const std::string& what, double worst)
      : Error(what), worst_gram_deviation(worst) {}
  double worst_gram_deviation;
};

struct NotNormalized : Error {
  using Error::Error;
};

struct NotHermitian : Error {
  using Error::Error;
};

struct NotUnitary : Error {
  using Error::Error;
};

struct NotDensity : Error {
  using Error::Error;
};

struct InvalidSpin : Error {
  using Error::Error;
};

struct InvalidPermutation : Error {
  using Error::Error;
};

struct ChainTooLong : Error {
  using Error::Error;
};

struct ConditioningOnNullEvent : Error {
  using Error::Error;
};

struct WrongScenarioShape : Error {
  using Error::Error;
};

struct SignallingInput : Error {
  using Error::Error;
};

struct IllConditionedProbes : Error {
  using Error::Error;
};

/// Scenario file failed schema validation. `field` names the offending entry.
struct SchemaError : Error {
  SchemaError(const std::string& field_, const std::string& reason)
      : Error("scenario field '" + field_ + "': " + reason), field(field_) {}
  std::string field;
};

struct UnknownKind : Error {
  using Error::Error;
};

}  // namespace csm
