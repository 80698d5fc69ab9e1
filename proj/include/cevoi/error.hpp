#pragma once

#include <stdexcept>
#include <string>

namespace cevoi {

/// Input that violates a documented precondition (shape, range, finiteness).
/// Maps to exit code 2 in the CLI and HTTP 422 in the service.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what, std::string field = {})
      : std::runtime_error(what), field_(std::move(field)) {}

  /// Name of the offending input field, empty when not attributable.
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// File system or stream failure. Exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cevoi
