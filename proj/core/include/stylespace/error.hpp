#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stylespace {

enum class ErrorKind {
  kInvalidArgument,
  kMissingFile,
  kDecode,
  kDuplicateId,
  kCountMismatch,
  kUnknownId,
  kSchema,
  kOutOfBounds,
  kNonFinite,
  kDimensionMismatch,
  kInsufficientData,
  kUndefined,
  kAuth,
  kTransport,
  kUpstream,
  kUsage,
};

std::string_view to_string(ErrorKind kind);

/// Library-wide exception. `subject` names the offending item (document id,
/// file, line) when there is one.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string subject = {})
      : std::runtime_error(message), kind_(kind), subject_(std::move(subject)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& subject() const noexcept { return subject_; }

 private:
  ErrorKind kind_;
  std::string subject_;
};

}  // namespace stylespace
