#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace plenome {

/// Failure categories. The CLI prints the category name on stderr so
/// callers can match on it.
enum class ErrorCategory {
  InvalidOptics,
  InvalidDiameter,
  InvalidArgument,
  OutOfBoundsMv,
  EmptyFeasibleSet,
  SpecTooSmall,
  ShiftExitsFrame,
  SizeMismatch,
  IndexOutOfRange,
  UnsupportedFormat,
  IoError,
  ParseError,
  Usage,
};

std::string_view category_name(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

}  // namespace plenome
