#pragma once

#include <stdexcept>
#include <string>

namespace fbms {

/// Failure categories raised by the library. The CLI maps these onto exit codes.
enum class ErrorKind {
  InvalidArgument,
  DomainError,
  SingularConfiguration,
  StepSizeUnderflow,
  MaxStepsExceeded,
  HorizonReached,
  NoSignChange,
  RegularizationDiverged,
  WrongRegime,
  CrossingNotFound,
  EmptyWindow,
  EventNotFound,
  BracketNotFound,
  DomainExceeded,
  Unbounded,
  RootNotBracketed,
  DimensionUnsupported,
  IoError,
};

[[nodiscard]] const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace fbms
