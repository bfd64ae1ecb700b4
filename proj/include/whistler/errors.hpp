#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace whistler {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A parameter left the mathematical domain of a model equation.
struct DomainError : Error {
  using Error::Error;
};

/// A caller-supplied argument violates a precondition.
struct InvalidArgument : Error {
  using Error::Error;
};

/// A row with zero spread where a spread is required (silent or corrupt input).
struct DegenerateRow : Error {
  using Error::Error;
};

/// Two grids that must agree in shape or resolution do not.
struct ShapeMismatch : Error {
  using Error::Error;
};

/// A sliding window does not fit in the series it is applied to.
struct WindowTooLarge : Error {
  using Error::Error;
};

/// File-format or filesystem failure.
struct IoError : Error {
  using Error::Error;
};

/// An error raised inside a pipeline run, annotated with the stage that failed.
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, const std::string& message)
      : Error("[" + stage + "] " + message), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace whistler
