#pragma once

#include <stdexcept>
#include <string>

namespace gtdyn {

// Base of every error raised by the library. The CLI maps any Error to exit
// code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define GTDYN_DEFINE_ERROR(Name) \
  class Name : public Error {    \
   public:                       \
    using Error::Error;          \
  }

GTDYN_DEFINE_ERROR(DimensionError);
GTDYN_DEFINE_ERROR(ConstraintError);
GTDYN_DEFINE_ERROR(DegenerateError);
GTDYN_DEFINE_ERROR(ParameterError);
GTDYN_DEFINE_ERROR(UnknownGameError);
GTDYN_DEFINE_ERROR(PositivityError);
GTDYN_DEFINE_ERROR(UnsupportedFamily);
GTDYN_DEFINE_ERROR(DomainError);
GTDYN_DEFINE_ERROR(QuadratureError);
GTDYN_DEFINE_ERROR(StepFailure);
GTDYN_DEFINE_ERROR(SizeError);
GTDYN_DEFINE_ERROR(ParseError);

#undef GTDYN_DEFINE_ERROR

// Configuration error carrying the JSON pointer of the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string pointer, const std::string& message)
      : Error(pointer + ": " + message), pointer_(std::move(pointer)) {}

  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

}  // namespace gtdyn
