#pragma once

#include <string>
#include <vector>

#include "procforge/model.hpp"

namespace procforge {

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  /// Node, flow, variable, interface, or invocation the problem is attached to.
  std::string element;
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

struct ValidationReport {
  std::vector<Diagnostic> diagnostics;

  [[nodiscard]] bool valid() const { return error_count() == 0; }
  [[nodiscard]] std::size_t error_count() const;
  [[nodiscard]] std::vector<Diagnostic> errors() const;

  friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

std::string to_string(const Diagnostic& d);

/// Maximum number of sequence flows; one bit each in a 256-bit marking word.
inline constexpr std::size_t kMaxFlows = 256;

/// Structural and type validation. Pure; never throws on model content.
///
/// When ids are duplicated or flows reference unknown nodes, the graph-shape
/// checks (degrees, reachability, safety) are skipped so that one broken
/// reference yields one diagnostic instead of a cascade.
ValidationReport validate_model(const ProcessModel& model);

}  // namespace procforge
