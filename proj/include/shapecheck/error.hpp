#ifndef SHAPECHECK_ERROR_HPP
#define SHAPECHECK_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace shapecheck {

enum class ErrorKind {
  SyntaxError,
  DuplicateDefinition,
  ArityMismatch,
  MalformedProgram,
  DuplicateTypeName,
  DuplicateCtor,
  UnboundTypeName,
  UnknownPrimitive,
  UnknownCtor,
  DeclNotAccepted,
  MalformedCall,
  NotFirstOrder,
  ExpansionLimit,
  IllTyped,
  InvalidArgument,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Source position, 1-based. A zero line means "no position".
struct SourcePos {
  std::size_t line = 0;
  std::size_t column = 0;
};

/// Every recoverable failure in the library is reported as an Error.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, SourcePos pos = {})
      : std::runtime_error(format(kind, message, pos)),
        kind_(kind),
        pos_(pos),
        message_(std::move(message)) {}

  ErrorKind kind() const noexcept { return kind_; }
  SourcePos pos() const noexcept { return pos_; }
  const std::string& message() const noexcept { return message_; }

 private:
  static std::string format(ErrorKind kind, const std::string& message,
                            SourcePos pos);

  ErrorKind kind_;
  SourcePos pos_;
  std::string message_;
};

}  // namespace shapecheck

#endif  // SHAPECHECK_ERROR_HPP
