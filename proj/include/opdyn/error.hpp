#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace opdyn {

enum class ErrorKind {
  DimensionMismatch,
  UnknownVariant,
  BudgetExceeded,
  NonConvergence,
  DimensionCapExceeded,
  GridTooLarge,
  InvalidArgument,
  NotUnimodular,
  NotInvertible,
  ZeroVector,
  SolverFailure,
  StepFailed,
  NotCommuting,
  ZeroImage,
  PairingDefect,
  NotDecomposable,
  NotProductClosed,
  NotMultiplicative,
  BoundViolation,
  Overflow,
  WindowViolation,
  UnknownExample,
  SchemaError,
  UnknownKind,
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::UnknownVariant: return "UnknownVariant";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::DimensionCapExceeded: return "DimensionCapExceeded";
    case ErrorKind::GridTooLarge: return "GridTooLarge";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NotUnimodular: return "NotUnimodular";
    case ErrorKind::NotInvertible: return "NotInvertible";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::SolverFailure: return "SolverFailure";
    case ErrorKind::StepFailed: return "StepFailed";
    case ErrorKind::NotCommuting: return "NotCommuting";
    case ErrorKind::ZeroImage: return "ZeroImage";
    case ErrorKind::PairingDefect: return "PairingDefect";
    case ErrorKind::NotDecomposable: return "NotDecomposable";
    case ErrorKind::NotProductClosed: return "NotProductClosed";
    case ErrorKind::NotMultiplicative: return "NotMultiplicative";
    case ErrorKind::BoundViolation: return "BoundViolation";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::WindowViolation: return "WindowViolation";
    case ErrorKind::UnknownExample: return "UnknownExample";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::UnknownKind: return "UnknownKind";
  }
  return "Unknown";
}

/// Single exception type for the library; the kind is the machine-readable part.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Configuration problem with a location inside the JSON document,
/// e.g. "analyses[0].balls[0].radius".
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& reason, ErrorKind kind = ErrorKind::SchemaError)
      : Error(kind, path.empty() ? reason : path + ": " + reason), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace opdyn
