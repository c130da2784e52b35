#pragma once

#include <stdexcept>
#include <string>

namespace ximarkov {

enum class ErrorKind {
  InvalidParameter,
  DegenerateResponse,
  PerfectInternalDependence,
  SingularConfiguration,
  EmptyConditioning,
  InvalidRadial,
  InvalidGrid,
  Io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid parameter";
    case ErrorKind::DegenerateResponse: return "degenerate response";
    case ErrorKind::PerfectInternalDependence: return "perfect internal dependence";
    case ErrorKind::SingularConfiguration: return "singular configuration";
    case ErrorKind::EmptyConditioning: return "empty conditioning";
    case ErrorKind::InvalidRadial: return "invalid radial";
    case ErrorKind::InvalidGrid: return "invalid grid";
    case ErrorKind::Io: return "i/o";
  }
  return "unknown";
}

// All library failures derive from Error so callers can branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace ximarkov
