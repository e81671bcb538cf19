#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pmc {

enum class ErrorKind {
  SyntaxError,
  DomainError,
  InvalidArgument,
  Overflow,
  PoleSingularity,
  SelfIntersection,
  QuadratureNonconvergence,
  NoRoot,
  DegenerateRoot,
  FitFailure,
  EmbeddingFailure,
  OutOfRange,
  GeometryTooTight,
  IllConditioned,
  EigenSolveFailure,
  NewtonDivergence,
  Infeasible,
  MaxIterations,
};

inline std::string_view kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::PoleSingularity: return "PoleSingularity";
    case ErrorKind::SelfIntersection: return "SelfIntersection";
    case ErrorKind::QuadratureNonconvergence: return "QuadratureNonconvergence";
    case ErrorKind::NoRoot: return "NoRoot";
    case ErrorKind::DegenerateRoot: return "DegenerateRoot";
    case ErrorKind::FitFailure: return "FitFailure";
    case ErrorKind::EmbeddingFailure: return "EmbeddingFailure";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::GeometryTooTight: return "GeometryTooTight";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::EigenSolveFailure: return "EigenSolveFailure";
    case ErrorKind::NewtonDivergence: return "NewtonDivergence";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::MaxIterations: return "MaxIterations";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(kind_name(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, const std::string& what)
      : Error(ErrorKind::SyntaxError, what + " at offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace pmc
