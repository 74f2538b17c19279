#include "shapecheck/error.hpp"

namespace shapecheck {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::DuplicateDefinition: return "DuplicateDefinition";
    case ErrorKind::ArityMismatch: return "ArityMismatch";
    case ErrorKind::MalformedProgram: return "MalformedProgram";
    case ErrorKind::DuplicateTypeName: return "DuplicateTypeName";
    case ErrorKind::DuplicateCtor: return "DuplicateCtor";
    case ErrorKind::UnboundTypeName: return "UnboundTypeName";
    case ErrorKind::UnknownPrimitive: return "UnknownPrimitive";
    case ErrorKind::UnknownCtor: return "UnknownCtor";
    case ErrorKind::DeclNotAccepted: return "DeclNotAccepted";
    case ErrorKind::MalformedCall: return "MalformedCall";
    case ErrorKind::NotFirstOrder: return "NotFirstOrder";
    case ErrorKind::ExpansionLimit: return "ExpansionLimit";
    case ErrorKind::IllTyped: return "IllTyped";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::IoError: return "IoError";
  }
  return "Error";
}

std::string Error::format(ErrorKind kind, const std::string& message,
                          SourcePos pos) {
  std::string out;
  if (pos.line != 0) {
    out += std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": ";
  }
  out += std::string(to_string(kind)) + ": " + message;
  return out;
}

}  // namespace shapecheck
