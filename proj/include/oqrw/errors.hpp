#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace oqrw {

enum class ErrorKind {
  dimension,
  convergence,
  contract,
  rank_deficiency,
  symmetry,
  schema,
  validation,
  lookup,
  indeterminate,
  spectral_pattern,
  scope,
  precondition,
  multiplicity,
  positivity,
  window,
  numerical_drift,
  degeneracy,
  standardization,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::contract: return "contract";
    case ErrorKind::rank_deficiency: return "rank-deficiency";
    case ErrorKind::symmetry: return "symmetry";
    case ErrorKind::schema: return "schema";
    case ErrorKind::validation: return "validation";
    case ErrorKind::lookup: return "lookup";
    case ErrorKind::indeterminate: return "indeterminate";
    case ErrorKind::spectral_pattern: return "spectral-pattern";
    case ErrorKind::scope: return "scope";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::multiplicity: return "multiplicity";
    case ErrorKind::positivity: return "positivity";
    case ErrorKind::window: return "window";
    case ErrorKind::numerical_drift: return "numerical-drift";
    case ErrorKind::degeneracy: return "degeneracy";
    case ErrorKind::standardization: return "standardization";
  }
  return "unknown";
}

/// Every failure raised by the library. The kind is stable and the CLI maps
/// it onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace oqrw
