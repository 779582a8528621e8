#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace uxv {

enum class Severity { Info, Warning, Error };

inline std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::Info: return "INFO";
    case Severity::Warning: return "WARNING";
    case Severity::Error: return "ERROR";
  }
  return "?";
}

// Machine-readable reason for a diagnostic; parse_plan maps the first error
// code it meets onto the matching exception type.
enum class DiagCode {
  EmptyPlan,
  DuplicateVehicle,
  EmptyMission,
  DuplicateCommandId,
  NegativeTimestamp,
  NonMonotonicTimestamps,
  MissingParameter,
  InvalidParameter,
  DanglingCondition,
  SelfMissionCondition,
  StructuralFirst,
  StructuralLast,
  StructuralContains,
  MissingCounterpart,
};

struct Diagnostic {
  Severity severity = Severity::Error;
  DiagCode code = DiagCode::EmptyPlan;
  std::string location;
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

// One-line record: `SEVERITY path message`.
inline std::string format_diagnostic(const Diagnostic& d) {
  std::string out{to_string(d.severity)};
  out += ' ';
  out += d.location.empty() ? std::string{"-"} : d.location;
  out += ' ';
  out += d.message;
  return out;
}

inline std::ostream& operator<<(std::ostream& os, const Diagnostic& d) {
  return os << format_diagnostic(d);
}

inline bool has_errors(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags)
    if (d.severity == Severity::Error) return true;
  return false;
}

}  // namespace uxv
